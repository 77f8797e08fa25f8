#include <benchmark/benchmark.h>

#include "spinn/merge.hpp"
#include "spinn/rng.hpp"

using namespace spinn;

namespace {

FeatureJets random_features(int d, int n, int rm, int ncoef) {
  FeatureJets f;
  f.rm = rm;
  RngStream rng(7);
  for (int i = 0; i < d; ++i) {
    FeatureAxis ax;
    ax.n = n;
    ax.ncoef = ncoef;
    ax.data.resize(static_cast<std::size_t>(n) * ncoef * rm);
    for (auto& v : ax.data) v = rng.uniform(-1, 1);
    f.axes.push_back(std::move(ax));
  }
  return f;
}

}  // namespace

static void MergeBatch3d(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  int rank = static_cast<int>(state.range(1));
  auto feats = random_features(3, n, rank, 1);
  SolutionGrid grid(std::vector<int>{n, n, n}, 1);
  std::vector<int> zeros{0, 0, 0};
  for (auto _ : state) {
    partial_batch_into(feats, zeros, rank, 1, grid, 1);
    benchmark::DoNotOptimize(grid.data.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.points());
}
BENCHMARK(MergeBatch3d)->Args({32, 32})->Args({64, 32})->Args({64, 128});

static void MergeBatch6d(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  int rank = static_cast<int>(state.range(1));
  auto feats = random_features(6, n, rank, 1);
  std::vector<int> dims(6, n);
  SolutionGrid grid(dims, 1);
  std::vector<int> zeros(6, 0);
  for (auto _ : state) {
    partial_batch_into(feats, zeros, rank, 1, grid, 1);
    benchmark::DoNotOptimize(grid.data.data());
  }
  state.SetItemsProcessed(state.iterations() * grid.points());
}
BENCHMARK(MergeBatch6d)->Args({8, 12});
