#pragma once

#include <span>
#include <vector>

#include "spinn/grid.hpp"
#include "spinn/model.hpp"
#include "spinn/tape.hpp"

namespace spinn {

// Pointwise feature merge: out[c] = sum_{j in component block c} prod_i f_i[j].
// Each input vector holds the r*m features of one axis at a single point.
std::vector<double> merge_point(
    std::span<const std::span<const double>> axis_features, int rank, int m);

/// Batched merge of the order-0 feature slices (accumulated outer products).
SolutionGrid merge_batch(const FeatureJets& feats, int rank, int m);

// Mixed partial derivative grid: substitutes each axis's order-alpha[i]
// derivative slice into the outer-product merge.
SolutionGrid partial_batch(const FeatureJets& feats, std::span<const int> alpha,
                           int rank, int m);

// Same merge writing into a preallocated grid, optionally tiled over axis 0
// across threads. Tiling is a pure partition of the output: results are
// identical for any thread count.
void partial_batch_into(const FeatureJets& feats, std::span<const int> alpha,
                        int rank, int m, SolutionGrid& out, int threads = 1);

/// Traced counterpart of partial_batch for one output component.
Range partial_traced(Tape& t, const TracedFeatures& feats,
                     std::span<const int> alpha, int component, int rank,
                     int m);

// Traced merge over a non-factorized point list: every axis block holds
// features of the same n points; out[i] = merge of row i across axes.
Range point_merge_traced(Tape& t, const TracedFeatures& feats, int component,
                         int rank, int m);

}  // namespace spinn
