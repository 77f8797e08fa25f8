#include <doctest.h>

#include <array>
#include <cmath>

#include "spinn/fd.hpp"
#include "spinn/merge.hpp"
#include "spinn/rng.hpp"

using namespace spinn;

namespace {

// Analytic rank-1 feature jets injected directly (no networks): axis values
// raised to stored derivative orders.
FeatureJets inject_features(const std::vector<std::vector<double>>& coords,
                            int rm, int ncoef, std::uint64_t seed) {
  FeatureJets f;
  f.rm = rm;
  RngStream rng(seed);
  for (const auto& xs : coords) {
    FeatureAxis ax;
    ax.n = static_cast<int>(xs.size());
    ax.ncoef = ncoef;
    ax.data.resize(static_cast<std::size_t>(ax.n) * ncoef * rm);
    for (auto& v : ax.data) v = rng.uniform(-1.0, 1.0);
    f.axes.push_back(std::move(ax));
  }
  return f;
}

double feat(const FeatureJets& f, int axis, int order, int n, int j) {
  const auto& ax = f.axes[static_cast<std::size_t>(axis)];
  return ax.data[(static_cast<std::size_t>(order) * ax.n + n) * f.rm + j];
}

}  // namespace

TEST_CASE("merge_point small cases") {
  // d=2 r=1 m=1: f=(2), g=(3) -> 6
  std::vector<double> f1{2.0}, g1{3.0};
  std::array<std::span<const double>, 2> in1{std::span<const double>(f1),
                                             std::span<const double>(g1)};
  CHECK(merge_point(in1, 1, 1)[0] == 6.0);

  // d=2 r=2 m=1: (1,2),(3,4) -> 11
  std::vector<double> f2{1.0, 2.0}, g2{3.0, 4.0};
  std::array<std::span<const double>, 2> in2{std::span<const double>(f2),
                                             std::span<const double>(g2)};
  CHECK(merge_point(in2, 2, 1)[0] == 11.0);

  std::vector<double> bad{1.0};
  std::array<std::span<const double>, 2> in3{std::span<const double>(f2),
                                             std::span<const double>(bad)};
  CHECK_THROWS_AS(merge_point(in3, 2, 1), ConfigError);
}

TEST_CASE("merge_point equals the brute-force double loop") {
  const int d = 3, r = 2, m = 2;
  RngStream rng(5);
  std::vector<std::vector<double>> feats(d, std::vector<double>(r * m));
  for (auto& f : feats)
    for (auto& v : f) v = rng.uniform(-1, 1);
  std::vector<std::span<const double>> views(feats.begin(), feats.end());
  auto got = merge_point(views, r, m);
  for (int c = 0; c < m; ++c) {
    double want = 0.0;
    for (int j = 0; j < r; ++j) {
      double prod = 1.0;
      for (int i = 0; i < d; ++i)
        prod *= feats[static_cast<std::size_t>(i)]
                     [static_cast<std::size_t>(c * r + j)];
      want += prod;
    }
    CHECK(got[static_cast<std::size_t>(c)] == doctest::Approx(want));
  }
}

TEST_CASE("merge_batch outer product, rank-1 2x2") {
  // f-column (1,2), g-column (3,4) -> [[3,4],[6,8]]
  FeatureJets f;
  f.rm = 1;
  f.axes.push_back(FeatureAxis{2, 1, {1.0, 2.0}});
  f.axes.push_back(FeatureAxis{2, 1, {3.0, 4.0}});
  SolutionGrid g = merge_batch(f, 1, 1);
  CHECK(g.data == std::vector<double>{3.0, 4.0, 6.0, 8.0});
}

TEST_CASE("merge_batch equals pointwise merge_point everywhere") {
  auto feats = inject_features({{0, 0, 0}, {0, 0, 0}, {0, 0, 0, 0}}, 4, 1, 11);
  // coords above only size the axes: 3 x 3 x 4 grid, r=2, m=2
  SolutionGrid grid = merge_batch(feats, 2, 2);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 4; ++c) {
        std::vector<double> rows[3];
        int idx[3] = {a, b, c};
        for (int i = 0; i < 3; ++i) {
          rows[i].resize(4);
          for (int j = 0; j < 4; ++j)
            rows[i][static_cast<std::size_t>(j)] = feat(feats, i, 0, idx[i], j);
        }
        std::vector<std::span<const double>> views{rows[0], rows[1], rows[2]};
        auto want = merge_point(views, 2, 2);
        std::array<int, 3> ia{a, b, c};
        for (int comp = 0; comp < 2; ++comp) {
          double got = grid.at(ia, comp);
          CHECK(std::abs(got - want[static_cast<std::size_t>(comp)]) <=
                1e-12 * std::max(1.0, std::abs(want[
                                     static_cast<std::size_t>(comp)])));
        }
      }
}

TEST_CASE("d=2 merged grids have matrix rank at most r") {
  const int r = 2;
  auto feats = inject_features({std::vector<double>(6, 0.0),
                                std::vector<double>(7, 0.0)},
                               r, 1, 29);
  SolutionGrid g = merge_batch(feats, r, 1);
  // Gaussian elimination rank of the 6x7 matrix
  std::vector<std::vector<double>> mat(6, std::vector<double>(7));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 7; ++j)
      mat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          g.data[static_cast<std::size_t>(i * 7 + j)];
  int rank = 0;
  for (int col = 0; col < 7 && rank < 6; ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int row = rank; row < 6; ++row)
      if (std::abs(mat[static_cast<std::size_t>(row)]
                      [static_cast<std::size_t>(col)]) > best) {
        best = std::abs(mat[static_cast<std::size_t>(row)]
                           [static_cast<std::size_t>(col)]);
        piv = row;
      }
    if (piv < 0) continue;
    std::swap(mat[static_cast<std::size_t>(rank)],
              mat[static_cast<std::size_t>(piv)]);
    for (int row = 0; row < 6; ++row) {
      if (row == rank) continue;
      double f = mat[static_cast<std::size_t>(row)]
                    [static_cast<std::size_t>(col)] /
                 mat[static_cast<std::size_t>(rank)]
                    [static_cast<std::size_t>(col)];
      for (int j = col; j < 7; ++j)
        mat[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] -=
            f * mat[static_cast<std::size_t>(rank)]
                   [static_cast<std::size_t>(j)];
    }
    ++rank;
  }
  CHECK(rank <= r);
}

TEST_CASE("partial with zero multi-index reproduces merge_batch") {
  auto feats = inject_features({{0, 0}, {0, 0, 0}}, 3, 3, 3);
  std::vector<int> zeros{0, 0};
  auto a = merge_batch(feats, 3, 1);
  auto b = partial_batch(feats, zeros, 3, 1);
  CHECK(a.data == b.data);
}

TEST_CASE("separable closed form: d/dx d/dy of x^2 sin(y)") {
  // rank-1 model with injected analytic factors evaluated at (1, 0)
  FeatureJets feats;
  feats.rm = 1;
  // axis x at value 1: f = x^2 -> (1, 2, 2)
  feats.axes.push_back(FeatureAxis{1, 3, {1.0, 2.0, 2.0}});
  // axis y at value 0: g = sin(y) -> (0, 1, 0)
  feats.axes.push_back(FeatureAxis{1, 3, {0.0, 1.0, 0.0}});
  std::vector<int> alpha{1, 1};
  auto g = partial_batch(feats, alpha, 1, 1);
  CHECK(g.data[0] == doctest::Approx(2.0));  // 2x * cos y at (1,0)
  std::vector<int> too_high{3, 0};
  CHECK_THROWS_AS(partial_batch(feats, too_high, 1, 1), ConfigError);
}

TEST_CASE("first-order partials match the hand-expanded rank sum") {
  // d=3, r=2: du/dx_i = sum_j f'_{ij} prod_{k!=i} f_{kj}
  auto feats = inject_features({{0, 0}, {0, 0}, {0, 0}}, 2, 2, 77);
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<int> alpha{0, 0, 0};
    alpha[static_cast<std::size_t>(axis)] = 1;
    auto g = partial_batch(feats, alpha, 2, 1);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          int idx[3] = {a, b, c};
          double want = 0.0;
          for (int j = 0; j < 2; ++j) {
            double prod = 1.0;
            for (int i = 0; i < 3; ++i)
              prod *= feat(feats, i, i == axis ? 1 : 0, idx[i], j);
            want += prod;
          }
          std::array<int, 3> ia{a, b, c};
          CHECK(g.at(ia) == doctest::Approx(want).epsilon(1e-12));
        }
  }
}

TEST_CASE("multilinearity: scaling one axis's rank-j features") {
  auto feats = inject_features({{0, 0, 0}, {0, 0}}, 2, 1, 13);
  auto base = merge_batch(feats, 2, 1);
  // scale rank-0 features of axis 0 by 3: the rank-0 contribution scales by 3
  auto scaled = feats;
  for (int n = 0; n < 3; ++n)
    scaled.axes[0].data[static_cast<std::size_t>(n) * 2 + 0] *= 3.0;
  auto out = merge_batch(scaled, 2, 1);

  // rank-1-only grid (zero out rank 0 on axis 0)
  auto only1 = feats;
  for (int n = 0; n < 3; ++n)
    only1.axes[0].data[static_cast<std::size_t>(n) * 2 + 0] = 0.0;
  auto g1 = merge_batch(only1, 2, 1);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    double rank0 = base.data[i] - g1.data[i];
    CHECK(out.data[i] == doctest::Approx(3.0 * rank0 + g1.data[i]));
  }
}

TEST_CASE("threaded merge equals the serial merge exactly") {
  auto feats = inject_features({std::vector<double>(5, 0.0),
                                std::vector<double>(4, 0.0),
                                std::vector<double>(3, 0.0)},
                               6, 2, 17);
  std::vector<int> alpha{1, 0, 1};
  SolutionGrid serial(std::vector<int>{5, 4, 3}, 2);
  SolutionGrid threaded(std::vector<int>{5, 4, 3}, 2);
  partial_batch_into(feats, alpha, 3, 2, serial, 1);
  partial_batch_into(feats, alpha, 3, 2, threaded, 3);
  CHECK(serial.data == threaded.data);
}

TEST_CASE("eval_features performs exactly sum(N_i) passes") {
  SeparableModel model =
      make_model(3, MlpConfig{2, 8, 0, MlpVariant::plain, 0}, 4, 1, 99);
  FactorizedBatch batch;
  batch.bounds = {{-1, 1}, {-1, 1}, {-1, 1}};
  RngStream rng(4);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> xs(64);
    for (auto& x : xs) x = rng.uniform(-1, 1);
    batch.coords.push_back(std::move(xs));
  }
  std::vector<int> orders{2, 2, 2};
  std::uint64_t before = model.propagation_count;
  eval_features(model, batch, orders);
  CHECK(model.propagation_count - before == 192);

  // degenerate d=2 case with one point per axis
  SeparableModel tiny =
      make_model(2, MlpConfig{1, 4, 0, MlpVariant::plain, 0}, 2, 1, 5);
  FactorizedBatch one;
  one.bounds = {{0, 1}, {0, 1}};
  one.coords = {{0.5}, {0.25}};
  before = tiny.propagation_count;
  std::vector<int> zero{0, 0};
  eval_features(tiny, one, zero);
  CHECK(tiny.propagation_count - before == 2);
}

TEST_CASE("order-0 feature slice equals independent forward passes bitwise") {
  SeparableModel model =
      make_model(2, MlpConfig{2, 6, 0, MlpVariant::plain, 0}, 3, 1, 21);
  FactorizedBatch batch;
  batch.bounds = {{-1, 1}, {-1, 1}};
  batch.coords = {{-0.5, 0.25, 0.75}, {0.1, -0.9}};
  std::vector<int> orders{2, 1};
  FeatureJets feats = eval_features(model, batch, orders);
  for (int axis = 0; axis < 2; ++axis) {
    const auto& ax = feats.axes[static_cast<std::size_t>(axis)];
    for (int n = 0; n < ax.n; ++n) {
      auto jets = forward_jet(model.axes[static_cast<std::size_t>(axis)],
                              model.params,
                              jet_seed(batch.coords[static_cast<std::size_t>(
                                           axis)][static_cast<std::size_t>(n)],
                                       0));
      for (int j = 0; j < feats.rm; ++j)
        CHECK(feat(feats, axis, 0, n, j) ==
              jets[static_cast<std::size_t>(j)].c[0]);
    }
  }
}

TEST_CASE("eval_features rejects out-of-domain coordinates") {
  SeparableModel model =
      make_model(2, MlpConfig{1, 4, 0, MlpVariant::plain, 0}, 2, 1, 5);
  FactorizedBatch bad;
  bad.bounds = {{0, 1}, {0, 1}};
  bad.coords = {{0.5}, {1.5}};
  std::vector<int> zero{0, 0};
  CHECK_THROWS_AS(eval_features(model, bad, zero), ConfigError);
}

TEST_CASE("traced features equal plain features bitwise") {
  SeparableModel model =
      make_model(3, MlpConfig{2, 5, 0, MlpVariant::plain, 0}, 2, 2, 8);
  FactorizedBatch batch;
  batch.bounds = {{-1, 1}, {-1, 1}, {-1, 1}};
  batch.coords = {{0.3, -0.2}, {0.8}, {-0.6, 0.0, 0.5}};
  std::vector<int> orders{1, 2, 0};
  FeatureJets plain = eval_features(model, batch, orders);
  Tape t;
  t.bind_params(model.params.values());
  TracedFeatures traced = eval_features_traced(t, model, batch, orders);
  for (int axis = 0; axis < 3; ++axis) {
    const auto& pa = plain.axes[static_cast<std::size_t>(axis)];
    const auto& ta = traced.axes[static_cast<std::size_t>(axis)];
    for (std::size_t i = 0; i < pa.data.size(); ++i)
      CHECK(pa.data[i] == t.val(ta.block.base + static_cast<NodeId>(i)));
  }
}
