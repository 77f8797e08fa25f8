#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinn/batch.hpp"
#include "spinn/net.hpp"
#include "spinn/params.hpp"
#include "spinn/tape.hpp"

namespace spinn {

// Feature jets of one axis: data[(k*n + i)*rm + j] is coefficient k of
// feature j at sample i. Matches the traced block layout so merge kernels
// serve both paths.
struct FeatureAxis {
  int n = 0;
  int ncoef = 1;
  std::vector<double> data;
};

struct FeatureJets {
  std::vector<FeatureAxis> axes;
  int rm = 0;
};

struct TracedAxis {
  Range block;
  int n = 0;
  int ncoef = 1;
};

struct TracedFeatures {
  std::vector<TracedAxis> axes;
  int rm = 0;
};

// The full separable solution representation: d per-axis body networks whose
// rank-wise feature products are summed into the prediction.
struct SeparableModel {
  int dim = 0;
  int rank = 0;
  int out_components = 1;
  std::vector<BodyNet> axes;
  ParamStore params;
  mutable std::uint64_t propagation_count = 0;

  int feature_width() const { return rank * out_components; }
  void validate() const;
};

SeparableModel make_model(std::span<const MlpConfig> per_axis, int rank,
                          int m);
SeparableModel make_model(int d, MlpConfig shared, int rank, int m,
                          std::uint64_t seed);

// Evaluates every per-axis feature jet with exactly sum(N_i) network passes
// (one jet pass per 1-d coordinate, all derivative orders at once) and bumps
// the propagation counter accordingly.
FeatureJets eval_features(const SeparableModel& model,
                          const FactorizedBatch& batch,
                          std::span<const int> orders);

TracedFeatures eval_features_traced(Tape& t, const SeparableModel& model,
                                    const FactorizedBatch& batch,
                                    std::span<const int> orders);

}  // namespace spinn
