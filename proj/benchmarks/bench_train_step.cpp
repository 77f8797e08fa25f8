#include <benchmark/benchmark.h>

#include "spinn/trainer.hpp"

using namespace spinn;
using namespace spinn::pde;

// Full optimization step (forward, backward, update) on the 32^3 benchmark
// configuration, excluding the periodic tape rebuild.
static void HelmholtzStep(benchmark::State& state) {
  PdeProblem p = make_problem(ProblemId::helmholtz3d);
  SeparableModel model = make_model(
      3, MlpConfig{4, 64, 0, MlpVariant::plain, 0}, 32, 1, 7);
  std::vector<int> counts{32, 32, 32};
  FactorizedBatch colloc = sample_factorized(p.domain, counts, 7, 0);
  auto faces = boundary_batches(p, counts, 7, 0);
  LossGraph graph(model, p, colloc, faces, nullptr);
  AdamState adam;
  adam.init(model.params.size());
  for (auto _ : state) {
    graph.refresh(model);
    graph.backward();
    adam_step(model.params.values(), graph.grad(), adam, 1e-3);
    benchmark::DoNotOptimize(graph.terms().total);
  }
}
BENCHMARK(HelmholtzStep)->Unit(benchmark::kMillisecond);

static void LossRebuild(benchmark::State& state) {
  PdeProblem p = make_problem(ProblemId::helmholtz3d);
  SeparableModel model = make_model(
      3, MlpConfig{4, 64, 0, MlpVariant::plain, 0}, 32, 1, 7);
  std::vector<int> counts{32, 32, 32};
  std::uint64_t round = 0;
  for (auto _ : state) {
    FactorizedBatch colloc = sample_factorized(p.domain, counts, 7, round);
    auto faces = boundary_batches(p, counts, 7, round);
    LossGraph graph(model, p, colloc, faces, nullptr);
    benchmark::DoNotOptimize(graph.terms().total);
    ++round;
  }
}
BENCHMARK(LossRebuild)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
