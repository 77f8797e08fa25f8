#include "spinn/merge.hpp"

#include <algorithm>
#include <thread>

#include "kernels.hpp"

namespace spinn {

std::vector<double> merge_point(
    std::span<const std::span<const double>> axis_features, int rank, int m) {
  require(!axis_features.empty(), "merge_point needs at least one axis");
  std::size_t rm = static_cast<std::size_t>(rank) * static_cast<std::size_t>(m);
  for (const auto& f : axis_features)
    require(f.size() == rm, "feature vector length must be rank*m");
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int c = 0; c < m; ++c) {
    double acc = 0.0;
    for (int j = 0; j < rank; ++j) {
      std::size_t jj = static_cast<std::size_t>(c) * rank +
                       static_cast<std::size_t>(j);
      double prod = axis_features[0][jj];
      for (std::size_t i = 1; i < axis_features.size(); ++i)
        prod *= axis_features[i][jj];
      acc += prod;
    }
    out[static_cast<std::size_t>(c)] = acc;
  }
  return out;
}

namespace {

detail::KAxis feature_axis_view(const FeatureAxis& ax, int rm, int order,
                                int component, int rank) {
  require(order < ax.ncoef, "requested derivative order exceeds stored order");
  std::size_t rms = static_cast<std::size_t>(rm);
  std::size_t row_block = static_cast<std::size_t>(ax.n) * rms;
  const double* rows = ax.data.data() +
                       static_cast<std::size_t>(order) * row_block +
                       static_cast<std::size_t>(component) * rank;
  return detail::KAxis{rows, nullptr, static_cast<std::size_t>(ax.n), rms};
}

}  // namespace

void partial_batch_into(const FeatureJets& feats, std::span<const int> alpha,
                        int rank, int m, SolutionGrid& out, int threads) {
  int d = static_cast<int>(feats.axes.size());
  require(static_cast<int>(alpha.size()) == d, "alpha length mismatch");
  std::size_t n0 = static_cast<std::size_t>(feats.axes[0].n);
  std::size_t inner = out.points() / n0;
  if (threads > static_cast<int>(n0)) threads = static_cast<int>(n0);
  if (threads < 1) threads = 1;

  auto run_rows = [&](std::size_t row0, std::size_t row1) {
    std::vector<double> scratch;
    for (int c = 0; c < m; ++c) {
      std::vector<detail::KAxis> axes;
      for (int i = 0; i < d; ++i)
        axes.push_back(feature_axis_view(
            feats.axes[static_cast<std::size_t>(i)], feats.rm,
            alpha[static_cast<std::size_t>(i)], c, rank));
      axes[0].rows += row0 * axes[0].stride;
      axes[0].n = row1 - row0;
      double* dst = out.component(c).data() + row0 * inner;
      detail::merge_sep_forward(axes.data(), d, rank, dst, scratch);
    }
  };

  if (threads == 1) {
    run_rows(0, n0);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n0 + static_cast<std::size_t>(threads) - 1) /
                      static_cast<std::size_t>(threads);
  for (int tid = 0; tid < threads; ++tid) {
    std::size_t r0 = static_cast<std::size_t>(tid) * chunk;
    if (r0 >= n0) break;
    std::size_t r1 = std::min(n0, r0 + chunk);
    pool.emplace_back(run_rows, r0, r1);
  }
  for (auto& th : pool) th.join();
}

SolutionGrid partial_batch(const FeatureJets& feats, std::span<const int> alpha,
                           int rank, int m) {
  std::vector<int> dims;
  for (const auto& ax : feats.axes) dims.push_back(ax.n);
  SolutionGrid grid(dims, m);
  partial_batch_into(feats, alpha, rank, m, grid, 1);
  return grid;
}

SolutionGrid merge_batch(const FeatureJets& feats, int rank, int m) {
  std::vector<int> zeros(feats.axes.size(), 0);
  return partial_batch(feats, zeros, rank, m);
}

Range partial_traced(Tape& t, const TracedFeatures& feats,
                     std::span<const int> alpha, int component, int rank,
                     int m) {
  int d = static_cast<int>(feats.axes.size());
  require(static_cast<int>(alpha.size()) == d, "alpha length mismatch");
  require(component >= 0 && component < m, "component out of range");
  auto rm = static_cast<std::uint32_t>(feats.rm);
  std::vector<MergeAxisArgs> axes;
  for (int i = 0; i < d; ++i) {
    const TracedAxis& ax = feats.axes[static_cast<std::size_t>(i)];
    int order = alpha[static_cast<std::size_t>(i)];
    require(order < ax.ncoef,
            "requested derivative order exceeds stored order");
    auto n = static_cast<std::uint32_t>(ax.n);
    NodeId rows = ax.block.base + static_cast<std::uint32_t>(order) * n * rm +
                  static_cast<std::uint32_t>(component * rank);
    axes.push_back(MergeAxisArgs{rows, n, rm});
  }
  return t.emit_merge_sep(axes, static_cast<std::uint32_t>(rank));
}

Range point_merge_traced(Tape& t, const TracedFeatures& feats, int component,
                         int rank, int m) {
  require(component >= 0 && component < m, "component out of range");
  auto rm = static_cast<std::uint32_t>(feats.rm);
  std::vector<MergeAxisArgs> axes;
  std::uint32_t n = 0;
  for (const TracedAxis& ax : feats.axes) {
    n = static_cast<std::uint32_t>(ax.n);
    NodeId rows = ax.block.base + static_cast<std::uint32_t>(component * rank);
    axes.push_back(MergeAxisArgs{rows, n, rm});
  }
  return t.emit_merge_point(axes, static_cast<std::uint32_t>(rank), n);
}

}  // namespace spinn
