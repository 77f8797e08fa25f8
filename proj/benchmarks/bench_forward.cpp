#include <benchmark/benchmark.h>

#include "spinn/net.hpp"

using namespace spinn;

static void ForwardJetPass(benchmark::State& state) {
  int order = static_cast<int>(state.range(0));
  MlpConfig cfg{4, 64, 32, MlpVariant::plain, 3};
  ParamStore store;
  BodyNet net = init_mlp(cfg, store);
  double x = 0.37;
  for (auto _ : state) {
    auto out = forward_jet(net, store, jet_seed(x, order));
    benchmark::DoNotOptimize(out.data());
    x = -x;
  }
}
BENCHMARK(ForwardJetPass)->Arg(0)->Arg(1)->Arg(2)->Arg(3);

static void TracedJetPass(benchmark::State& state) {
  int order = static_cast<int>(state.range(0));
  MlpConfig cfg{4, 64, 32, MlpVariant::plain, 3};
  ParamStore store;
  BodyNet net = init_mlp(cfg, store);
  Tape tape;
  tape.bind_params(store.values());
  Range block = tape.reserve(static_cast<std::uint32_t>(order + 1) * 32);
  trace_forward_jet(tape, net, 0.37, order, block.base, 32);
  for (auto _ : state) {
    tape.forward_all();
    benchmark::DoNotOptimize(tape.node_count());
  }
}
BENCHMARK(TracedJetPass)->Arg(0)->Arg(2);
