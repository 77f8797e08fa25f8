#include <doctest.h>

#include <cmath>

#include "spinn/fd.hpp"
#include "spinn/net.hpp"
#include "spinn/rng.hpp"

using namespace spinn;

TEST_CASE("parameter counts follow the layer shapes") {
  MlpConfig small{1, 2, 3, MlpVariant::plain, 0};
  CHECK(param_count(small) == 13);  // (1*2+2) + (2*3+3)

  MlpConfig ref{4, 64, 32, MlpVariant::plain, 0};
  CHECK(param_count(ref) == 14688);

  ParamStore store;
  BodyNet net = init_mlp(ref, store);
  CHECK(store.size() == 14688);
  CHECK(net.stack.size() == 5);  // input + 3 hidden + output

  // slices are disjoint and cover the store
  std::size_t total = 0;
  for (const auto& s : store.slices()) total += s.size();
  CHECK(total == store.size());
}

TEST_CASE("initialization is deterministic under the seed") {
  MlpConfig cfg{2, 8, 4, MlpVariant::plain, 1234};
  ParamStore a, b;
  init_mlp(cfg, a);
  init_mlp(cfg, b);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a.values()[i] == b.values()[i]);

  MlpConfig other = cfg;
  other.seed = 1235;
  ParamStore c;
  init_mlp(other, c);
  int diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.values()[i] != c.values()[i]) ++diff;
  CHECK(diff > 0);
}

TEST_CASE("glorot bounds and zero biases") {
  MlpConfig cfg{2, 16, 8, MlpVariant::plain, 77};
  ParamStore store;
  init_mlp(cfg, store);
  for (const auto& s : store.slices()) {
    bool is_bias = s.name.ends_with("/b");
    for (double v : store.slice(s)) {
      if (is_bias) {
        CHECK(v == 0.0);
      } else {
        double bound = std::sqrt(6.0 / (static_cast<double>(s.rows) +
                                        static_cast<double>(s.cols)));
        CHECK(std::abs(v) <= bound + 1e-12);
      }
    }
  }
}

TEST_CASE("a single affine layer maps jets linearly") {
  // W=[[2]], b=[1]: x = (3,1) -> (7,2)
  ParamStore direct;
  std::size_t w = direct.add("W", 1, 1);
  std::size_t b = direct.add("b", 1, 1);
  direct.values()[w] = 2.0;
  direct.values()[b] = 1.0;
  BodyNet lin;
  lin.cfg = MlpConfig{1, 1, 1, MlpVariant::plain, 0};
  lin.stack.push_back(AffineOffsets{w, b, 1, 1});
  auto out = forward_jet(lin, direct, jet_seed(3.0, 1));
  REQUIRE(out.size() == 1);
  CHECK(out[0].c[0] == 7.0);
  CHECK(out[0].c[1] == 2.0);
}

TEST_CASE("order-0 forward equals the plain evaluation bitwise") {
  MlpConfig cfg{3, 8, 5, MlpVariant::plain, 42};
  ParamStore store;
  BodyNet net = init_mlp(cfg, store);
  auto j = forward_jet(net, store, jet_seed(0.37, 0));
  auto j2 = forward_jet(net, store, jet_seed(0.37, 2));
  for (std::size_t i = 0; i < j.size(); ++i) CHECK(j[i].c[0] == j2[i].c[0]);
}

TEST_CASE("jet derivatives of the forward pass match finite differences") {
  for (auto variant : {MlpVariant::plain, MlpVariant::modified}) {
    MlpConfig cfg{2, 8, 4, variant, 2024};
    ParamStore store;
    BodyNet net = init_mlp(cfg, store);
    for (double x : {-0.8, 0.1, 0.9}) {
      auto jets = forward_jet(net, store, jet_seed(x, 2));
      for (std::size_t o = 0; o < jets.size(); ++o) {
        auto f = [&](double t) {
          return forward_jet(net, store, jet_seed(t, 0))[o].c[0];
        };
        CHECK(rel_err(jets[o].c[1], fd_derivative(f, x, 1, 1e-5)) < 1e-5);
        CHECK(rel_err(jets[o].c[2], fd_derivative(f, x, 2, 5e-4)) < 1e-5);
      }
    }
  }
}

TEST_CASE("third-order jets match finite differences of the slope") {
  MlpConfig cfg{2, 6, 2, MlpVariant::plain, 5};
  ParamStore store;
  BodyNet net = init_mlp(cfg, store);
  double x = 0.3;
  auto jets = forward_jet(net, store, jet_seed(x, 3));
  for (std::size_t o = 0; o < jets.size(); ++o) {
    auto slope = [&](double t) {
      return forward_jet(net, store, jet_seed(t, 1))[o].c[1];
    };
    CHECK(rel_err(jets[o].c[3], fd_derivative(slope, x, 2, 5e-4)) < 1e-4);
  }
}

TEST_CASE("modified variant collapses when the gates coincide") {
  MlpConfig cfg{3, 6, 2, MlpVariant::modified, 9};
  ParamStore store;
  BodyNet net = init_mlp(cfg, store);
  // force V = U
  const auto* us = store.find("net/U/W");
  const auto* vs = store.find("net/V/W");
  const auto* ub = store.find("net/U/b");
  const auto* vb = store.find("net/V/b");
  REQUIRE(us != nullptr);
  for (std::size_t i = 0; i < us->size(); ++i)
    store.values()[vs->offset + i] = store.values()[us->offset + i];
  for (std::size_t i = 0; i < ub->size(); ++i)
    store.values()[vb->offset + i] = store.values()[ub->offset + i];

  // With U == V every hidden mix reduces to U, so the output is the output
  // affine applied to U regardless of the Z layers.
  double x = 0.42;
  auto out = forward_jet(net, store, jet_seed(x, 0));

  const auto& ow = *store.find("net/out/W");
  const auto& ob = *store.find("net/out/b");
  const auto& uw = *store.find("net/U/W");
  const auto& ubv = *store.find("net/U/b");
  std::vector<double> u(static_cast<std::size_t>(cfg.width));
  for (int i = 0; i < cfg.width; ++i)
    u[static_cast<std::size_t>(i)] =
        std::tanh(store.values()[uw.offset + static_cast<std::size_t>(i)] * x +
                  store.values()[ubv.offset + static_cast<std::size_t>(i)]);
  for (int o = 0; o < cfg.out_dim; ++o) {
    double acc = store.values()[ob.offset + static_cast<std::size_t>(o)];
    for (int i = 0; i < cfg.width; ++i)
      acc += store.values()[ow.offset +
                            static_cast<std::size_t>(o * cfg.width + i)] *
             u[static_cast<std::size_t>(i)];
    CHECK(out[static_cast<std::size_t>(o)].c[0] == doctest::Approx(acc));
  }
}

TEST_CASE("traced pass equals the plain pass bitwise") {
  for (auto variant : {MlpVariant::plain, MlpVariant::modified}) {
    for (int order : {0, 1, 2, 3}) {
      MlpConfig cfg{3, 8, 6, variant, 31337};
      ParamStore store;
      BodyNet net = init_mlp(cfg, store);
      double x = -0.23;

      auto plain = forward_jet(net, store, jet_seed(x, order));

      Tape t;
      t.bind_params(store.values());
      auto rm = static_cast<std::uint32_t>(cfg.out_dim);
      Range block = t.reserve(static_cast<std::uint32_t>(order + 1) * rm);
      trace_forward_jet(t, net, x, order, block.base, rm);
      for (int k = 0; k <= order; ++k)
        for (int o = 0; o < cfg.out_dim; ++o)
          CHECK(t.val(block.base + static_cast<NodeId>(k * cfg.out_dim + o)) ==
                plain[static_cast<std::size_t>(o)]
                    .c[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("parameter gradients through the traced pass match fd") {
  for (auto variant : {MlpVariant::plain, MlpVariant::modified}) {
    MlpConfig cfg{2, 4, 3, variant, 8};
    ParamStore store;
    BodyNet net = init_mlp(cfg, store);
    double x = 0.61;
    const int order = 2;
    const auto rm = static_cast<std::uint32_t>(cfg.out_dim);

    Tape t;
    t.bind_params(store.values());
    Range block = t.reserve(static_cast<std::uint32_t>(order + 1) * rm);
    trace_forward_jet(t, net, x, order, block.base, rm);
    NodeId loss = t.mean_sq(block, 1.0);
    t.backward(loss);
    std::vector<double> grad(t.param_grad().begin(), t.param_grad().end());

    auto loss_at = [&](std::size_t i, double v) {
      ParamStore s2;
      BodyNet n2 = init_mlp(cfg, s2);
      s2.values()[i] = v;
      Tape t2;
      t2.bind_params(s2.values());
      Range b2 = t2.reserve(static_cast<std::uint32_t>(order + 1) * rm);
      trace_forward_jet(t2, n2, x, order, b2.base, rm);
      return t2.val(t2.mean_sq(b2, 1.0));
    };
    RngStream pick(3);
    for (int rep = 0; rep < 12; ++rep) {
      std::size_t i = pick.next_u64() % store.size();
      double base = store.values()[i];
      auto fi = [&](double v) { return loss_at(i, v); };
      CHECK(rel_err(grad[i], fd_derivative(fi, base, 1, 1e-6)) < 1e-5);
    }
  }
}
