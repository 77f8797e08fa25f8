#include <doctest.h>

#include <cmath>
#include <vector>

#include "spinn/fd.hpp"
#include "spinn/rng.hpp"
#include "spinn/tape.hpp"

using namespace spinn;

TEST_CASE("scalar products and adjoint seeding") {
  // loss = w*x with parameter w=3 and constant x=2 -> dloss/dw = 2
  std::vector<double> params{3.0};
  Tape t;
  t.bind_params(params);
  Var w = t.node_var(0);
  Var loss = w * t.cvar(2.0);
  CHECK(loss.value() == 6.0);
  t.backward(loss.id);
  CHECK(t.adj(loss.id) == 1.0);
  CHECK(t.param_grad()[0] == 2.0);
}

TEST_CASE("tanh gradient at zero") {
  std::vector<double> params{0.0};
  Tape t;
  t.bind_params(params);
  Var loss = tanh(t.node_var(0));
  t.backward(loss.id);
  CHECK(t.param_grad()[0] == doctest::Approx(1.0));
}

TEST_CASE("non-participating parameters get exactly zero") {
  std::vector<double> params{1.0, 2.0, 3.0};
  Tape t;
  t.bind_params(params);
  Var loss = t.node_var(1) * t.node_var(1);
  t.backward(loss.id);
  CHECK(t.param_grad()[0] == 0.0);
  CHECK(t.param_grad()[2] == 0.0);
  CHECK(t.param_grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("backward rejects non-scalar outputs") {
  Tape t;
  t.bind_params(std::vector<double>{1.0});
  double xs[2] = {1.0, 2.0};
  Range r = t.constants(xs);
  CHECK_THROWS_AS(t.backward_scalar(r), ConfigError);
}

namespace {

// Small two-layer tanh net on scalar tape vars.
Var scalar_net(Tape& t, std::span<const double> params) {
  (void)params;
  Var w0 = t.node_var(0), b0 = t.node_var(1), w1 = t.node_var(2),
      b1 = t.node_var(3), w2 = t.node_var(4);
  Var x = t.cvar(0.7);
  Var h = tanh(w0 * x + b0);
  Var h2 = tanh(w1 * h + b1);
  return w2 * h2;
}

}  // namespace

TEST_CASE("reverse gradient matches finite differences on a tiny net") {
  std::vector<double> params{0.8, -0.1, 1.3, 0.2, -0.5};
  Tape t;
  t.bind_params(params);
  Var loss = scalar_net(t, params);
  t.backward(loss.id);
  std::vector<double> grad(t.param_grad().begin(), t.param_grad().end());

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto f = [&](double v) {
      std::vector<double> p = params;
      p[i] = v;
      Tape t2;
      t2.bind_params(p);
      return scalar_net(t2, p).value();
    };
    double fd = fd_derivative(f, params[i], 1, 1e-6);
    CHECK(rel_err(grad[i], fd) < 1e-5);
  }
}

TEST_CASE("backward is linear in the seeded output") {
  std::vector<double> params{0.4, 0.9};
  auto grad_of = [&](double a, double b) {
    Tape t;
    t.bind_params(params);
    Var l1 = sin(t.node_var(0)) * t.node_var(1);
    Var l2 = exp(t.node_var(0) * 0.5);
    Var combo = l1 * a + l2 * b;
    t.backward(combo.id);
    return std::vector<double>(t.param_grad().begin(), t.param_grad().end());
  };
  auto g10 = grad_of(1, 0);
  auto g01 = grad_of(0, 1);
  auto g23 = grad_of(2, 3);
  for (std::size_t i = 0; i < params.size(); ++i)
    CHECK(g23[i] == doctest::Approx(2 * g10[i] + 3 * g01[i]).epsilon(1e-12));
}

TEST_CASE("elementwise array ops and reductions") {
  Tape t;
  t.bind_params(std::vector<double>{});
  double av[3] = {1, 2, 3}, bv[3] = {4, 5, 6};
  Range a = t.constants(av), b = t.constants(bv);
  auto sum = t.vals(t.add(a, b));
  CHECK(sum[0] == 5.0);
  CHECK(sum[2] == 9.0);
  auto prod = t.vals(t.mul(a, b));
  CHECK(prod[1] == 10.0);
  NodeId ms = t.mean_sq(a, 3.0);
  CHECK(t.val(ms) == doctest::Approx((1 + 4 + 9) / 3.0));

  std::vector<std::uint8_t> mask{1, 0, 1};
  NodeId msm = t.mean_sq_masked(a, mask, 2.0);
  CHECK(t.val(msm) == doctest::Approx((1 + 9) / 2.0));
}

TEST_CASE("mean_sq backward") {
  std::vector<double> params{2.0, -3.0};
  Tape t;
  t.bind_params(params);
  NodeId ms = t.mean_sq(Range{0, 2}, 2.0);
  t.backward(ms);
  CHECK(t.param_grad()[0] == doctest::Approx(2.0 * 2.0 / 2.0));
  CHECK(t.param_grad()[1] == doctest::Approx(2.0 * -3.0 / 2.0));
}

TEST_CASE("jet_affine forward and backward match the scalar route") {
  // y[k] = W x[k] + (k==0) b with W 2x2; trace both ways and compare.
  std::vector<double> params{0.5, -1.0, 2.0, 0.25, 0.1, -0.2};  // W row-major, b
  Tape t;
  t.bind_params(params);
  double xv[4] = {0.3, 1.0, -0.7, 0.4};  // 2 coeffs x 2 units
  Range x = t.constants(xv);
  Range out = t.reserve(4);
  t.emit_jet_affine(JetAffineArgs{2, 2, 2, 0, 4, x.base, out.base, 2});
  // coefficient 0: W*(0.3,1.0) + b
  CHECK(t.val(out.base + 0) ==
        doctest::Approx(0.5 * 0.3 + -1.0 * 1.0 + 0.1));
  CHECK(t.val(out.base + 1) == doctest::Approx(2.0 * 0.3 + 0.25 * 1.0 - 0.2));
  // coefficient 1: W*(-0.7,0.4), no bias
  CHECK(t.val(out.base + 2) == doctest::Approx(0.5 * -0.7 + -1.0 * 0.4));
  CHECK(t.val(out.base + 3) == doctest::Approx(2.0 * -0.7 + 0.25 * 0.4));

  NodeId loss = t.mean_sq(out, 1.0);
  t.backward(loss);
  auto grad = t.param_grad();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto f = [&](double v) {
      std::vector<double> p = params;
      p[i] = v;
      Tape t2;
      t2.bind_params(p);
      Range x2 = t2.constants(xv);
      Range out2 = t2.reserve(4);
      t2.emit_jet_affine(JetAffineArgs{2, 2, 2, 0, 4, x2.base, out2.base, 2});
      return t2.val(t2.mean_sq(out2, 1.0));
    };
    CHECK(rel_err(grad[i], fd_derivative(f, params[i], 1, 1e-6)) < 1e-6);
  }
}

TEST_CASE("merge ops differentiate correctly") {
  // Two axes, 2 and 3 samples, rank 2; parameters feed the feature rows.
  std::vector<double> params;
  RngStream rng(99);
  for (int i = 0; i < 10; ++i) params.push_back(rng.uniform(-1, 1));

  auto build = [&](std::span<const double> p, bool point_merge) {
    Tape t;
    t.bind_params(p);
    // axis 0 rows at node 0 (2 rows of 2), axis 1 rows at node 4 (3 rows of 2)
    std::vector<MergeAxisArgs> axes{{0, 2, 2}, {4, point_merge ? 2u : 3u, 2}};
    Range out = point_merge ? t.emit_merge_point(axes, 2, 2)
                            : t.emit_merge_sep(axes, 2);
    NodeId loss = t.mean_sq(out, static_cast<double>(out.len));
    t.backward(loss);
    return std::pair<double, std::vector<double>>(
        t.val(loss),
        std::vector<double>(t.param_grad().begin(), t.param_grad().end()));
  };

  for (bool pm : {false, true}) {
    auto [loss, grad] = build(params, pm);
    // brute-force value check for the separable case
    if (!pm) {
      double acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
          double v = params[static_cast<std::size_t>(2 * i)] *
                         params[static_cast<std::size_t>(4 + 2 * j)] +
                     params[static_cast<std::size_t>(2 * i + 1)] *
                         params[static_cast<std::size_t>(4 + 2 * j + 1)];
          acc += v * v;
        }
      CHECK(loss == doctest::Approx(acc / 6.0));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (pm && i >= 8) continue;  // point merge only reads 2 rows per axis
      auto f = [&](double v) {
        std::vector<double> p(params.begin(), params.end());
        p[i] = v;
        return build(p, pm).first;
      };
      CHECK(rel_err(grad[i], fd_derivative(f, params[i], 1, 1e-6)) < 1e-5);
    }
  }
}

TEST_CASE("refresh and forward_all recompute with new parameters") {
  std::vector<double> params{1.0};
  Tape t;
  t.bind_params(params);
  Var loss = t.node_var(0) * t.node_var(0) * t.cvar(3.0);
  CHECK(loss.value() == 3.0);
  params[0] = 2.0;
  t.refresh_params(params);
  t.forward_all();
  CHECK(loss.value() == 12.0);
  t.backward(loss.id);
  CHECK(t.param_grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("jets of tape vars propagate reverse-over-forward") {
  // f(x) = tanh(w * x); jet carries d/dx, tape carries d/dw of jet coeffs.
  std::vector<double> params{0.9};
  Tape t;
  t.bind_params(params);
  Jet<Var> x = jet_seed(t, 0.6, 2);
  Jet<Var> w;
  w.order = 2;
  w.c[0] = t.node_var(0);
  w.c[1] = t.cvar(0.0);
  w.c[2] = t.cvar(0.0);
  Jet<Var> y = tanh(w * x);
  // d/dw of y.c[1] = d/dw [w sech^2(w x)] via finite differences
  t.backward(y.c[1].id);
  double grad = t.param_grad()[0];
  auto f = [&](double wv) {
    auto j = tanh(jet_const(wv, 2) * jet_seed(0.6, 2));
    return j.c[1];
  };
  CHECK(rel_err(grad, fd_derivative(f, params[0], 1, 1e-6)) < 1e-6);
}
