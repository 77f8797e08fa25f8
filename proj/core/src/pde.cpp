#include "spinn/pde.hpp"

#include <array>
#include <cmath>

#include "spinn/rng.hpp"

namespace spinn::pde {

namespace {

constexpr std::uint64_t kSampleTag = 0x73616d70ull;  // collocation streams
constexpr std::uint64_t kFaceTag = 0x66616365ull;    // boundary streams

Domain box(std::vector<AxisInterval> axes, std::vector<std::string> names,
           int time_axis) {
  Domain d;
  d.axes = std::move(axes);
  d.axis_names = std::move(names);
  d.time_axis = time_axis;
  return d;
}

}  // namespace

PdeProblem make_problem(ProblemId id) {
  PdeProblem p;
  p.id = id;
  p.name = to_string(id);
  p.residual_weights = {1.0};
  switch (id) {
    case ProblemId::helmholtz3d:
      p.domain = box({{-1, 1}, {-1, 1}, {-1, 1}}, {"x1", "x2", "x3"}, -1);
      p.orders = {2, 2, 2};
      p.default_eval_resolution = 101;
      break;
    case ProblemId::kg3d:
      p.domain = box({{0, 10}, {-1, 1}, {-1, 1}}, {"t", "x1", "x2"}, 0);
      p.orders = {2, 2, 2};
      p.default_eval_resolution = 101;
      break;
    case ProblemId::kg4d:
      p.domain = box({{0, 10}, {-1, 1}, {-1, 1}, {-1, 1}},
                     {"t", "x1", "x2", "x3"}, 0);
      p.orders = {2, 2, 2, 2};
      p.default_eval_resolution = 32;
      break;
    case ProblemId::diffusion_nl3d:
      p.domain = box({{0, 1}, {-1, 1}, {-1, 1}}, {"t", "x", "y"}, 0);
      p.orders = {1, 2, 2};
      p.has_exact = false;
      p.default_eval_resolution = 101;
      break;
    case ProblemId::diffusion6d:
      p.domain = box({{0, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
                     {"t", "x1", "x2", "x3", "x4", "x5"}, 0);
      p.orders = {1, 2, 2, 2, 2, 2};
      p.default_eval_resolution = 11;
      break;
    case ProblemId::flow_mixing:
      p.domain = box({{0, 4}, {-4, 4}, {-4, 4}}, {"t", "x", "y"}, 0);
      p.orders = {1, 1, 1};
      p.default_eval_resolution = 101;
      break;
    case ProblemId::poisson_lshape:
      p.domain = box({{-1, 1}, {-1, 1}}, {"x", "y"}, -1);
      p.orders = {2, 2};
      p.has_exact = false;
      p.masked = true;
      p.nonseparable_bc = true;
      p.default_eval_resolution = 201;
      break;
    case ProblemId::ns4d:
      p.domain = box({{0, 5},
                      {0, 2 * M_PI},
                      {0, 2 * M_PI},
                      {0, 2 * M_PI}},
                     {"t", "x", "y", "z"}, 0);
      p.orders = {1, 3, 3, 3};
      p.out_components = 3;
      p.residual_weights = {1.0, 1.0, 1.0, 100.0};
      p.lambda_ic = 10.0;
      p.default_eval_resolution = 16;
      break;
  }
  return p;
}

const char* to_string(ProblemId id) {
  switch (id) {
    case ProblemId::helmholtz3d: return "helmholtz3d";
    case ProblemId::kg3d: return "kg3d";
    case ProblemId::kg4d: return "kg4d";
    case ProblemId::diffusion_nl3d: return "diffusion_nl3d";
    case ProblemId::diffusion6d: return "diffusion6d";
    case ProblemId::flow_mixing: return "flow_mixing";
    case ProblemId::poisson_lshape: return "poisson_lshape";
    case ProblemId::ns4d: return "ns4d";
  }
  return "?";
}

std::vector<std::string> problem_id_list() {
  return {"helmholtz3d",    "kg3d",        "kg4d",        "diffusion_nl3d",
          "diffusion6d",    "flow_mixing", "poisson_lshape", "ns4d"};
}

std::optional<ProblemId> problem_from_string(std::string_view s) {
  static constexpr std::array<ProblemId, 8> all = {
      ProblemId::helmholtz3d,    ProblemId::kg3d,
      ProblemId::kg4d,           ProblemId::diffusion_nl3d,
      ProblemId::diffusion6d,    ProblemId::flow_mixing,
      ProblemId::poisson_lshape, ProblemId::ns4d};
  for (ProblemId id : all)
    if (s == to_string(id)) return id;
  return std::nullopt;
}

FactorizedBatch sample_factorized(const Domain& domain,
                                  std::span<const int> counts,
                                  std::uint64_t seed, std::uint64_t round) {
  require(static_cast<int>(counts.size()) == domain.dim(),
          "counts size mismatch");
  FactorizedBatch batch;
  batch.bounds = domain.axes;
  for (int i = 0; i < domain.dim(); ++i) {
    int n = counts[static_cast<std::size_t>(i)];
    require(n >= 1, "axis sample count must be >= 1");
    auto rng = RngStream::from_tags(
        {seed, kSampleTag, static_cast<std::uint64_t>(i), round});
    const auto& iv = domain.axes[static_cast<std::size_t>(i)];
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = rng.uniform(iv.lo, iv.hi);
    batch.coords.push_back(std::move(xs));
  }
  return batch;
}

FactorizedBatch uniform_batch(const Domain& domain, int resolution) {
  FactorizedBatch batch;
  batch.bounds = domain.axes;
  for (const auto& iv : domain.axes)
    batch.coords.push_back(linspace(iv.lo, iv.hi, resolution));
  return batch;
}

namespace {

void fill_face_targets(const PdeProblem& p, FaceBatch& face) {
  const int d = p.dim();
  std::vector<std::size_t> dims;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    dims.push_back(face.batch.coords[static_cast<std::size_t>(i)].size());
    total *= dims.back();
  }
  face.targets.assign(static_cast<std::size_t>(p.out_components),
                      std::vector<double>(total));
  std::vector<double> point(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = d - 1; i >= 0; --i) {
      std::size_t idx = rem % dims[static_cast<std::size_t>(i)];
      rem /= dims[static_cast<std::size_t>(i)];
      point[static_cast<std::size_t>(i)] =
          face.batch.coords[static_cast<std::size_t>(i)][idx];
    }
    for (int c = 0; c < p.out_components; ++c)
      face.targets[static_cast<std::size_t>(c)][flat] =
          face_target_value(p, c, point, face.is_initial);
  }
}

}  // namespace

std::vector<FaceBatch> boundary_batches(const PdeProblem& problem,
                                        std::span<const int> counts,
                                        std::uint64_t seed,
                                        std::uint64_t round) {
  if (problem.nonseparable_bc) return {};
  const Domain& dom = problem.domain;
  const int d = dom.dim();
  std::vector<FaceBatch> faces;
  std::uint64_t face_index = 0;
  for (int a = 0; a < d; ++a) {
    bool is_time = (a == dom.time_axis);
    int sides = is_time ? 1 : 2;  // no terminal condition on the time axis
    for (int side = 0; side < sides; ++side) {
      FaceBatch face;
      face.pinned_axis = a;
      face.is_initial = is_time;
      face.batch.bounds = dom.axes;
      for (int i = 0; i < d; ++i) {
        const auto& iv = dom.axes[static_cast<std::size_t>(i)];
        if (i == a) {
          face.batch.coords.push_back({side == 0 ? iv.lo : iv.hi});
        } else {
          auto rng = RngStream::from_tags({seed, kFaceTag, face_index,
                                           static_cast<std::uint64_t>(i),
                                           round});
          int n = counts[static_cast<std::size_t>(i)];
          std::vector<double> xs(static_cast<std::size_t>(n));
          for (auto& x : xs) x = rng.uniform(iv.lo, iv.hi);
          face.batch.coords.push_back(std::move(xs));
        }
      }
      fill_face_targets(problem, face);
      faces.push_back(std::move(face));
      ++face_index;
    }
  }
  return faces;
}

bool lshape_inside(double x, double y) { return !(x > 0.0 && y > 0.0); }

std::vector<std::uint8_t> lshape_mask(const FactorizedBatch& batch) {
  require(batch.dim() == 2, "L-shape mask is two-dimensional");
  const auto& xs = batch.coords[0];
  const auto& ys = batch.coords[1];
  std::vector<std::uint8_t> mask(xs.size() * ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      mask[i * ys.size() + j] = lshape_inside(xs[i], ys[j]) ? 1 : 0;
  return mask;
}

PointBatch lshape_boundary_points(int points_per_edge, std::uint64_t seed,
                                  std::uint64_t round) {
  // 4 outer edges of [-1,1]^2 (right and top stop at the removed quadrant)
  // plus the 2 re-entrant edges of the removed corner; u = 0 on all of them.
  struct Edge {
    double x0, y0, x1, y1;
  };
  const std::vector<Edge> edges = {
      {-1, -1, -1, 1},  // left
      {-1, -1, 1, -1},  // bottom
      {1, -1, 1, 0},    // right (below the corner)
      {-1, 1, 0, 1},    // top (left of the corner)
      {0, 0, 0, 1},     // re-entrant vertical
      {0, 0, 1, 0},     // re-entrant horizontal
  };
  PointBatch pb;
  pb.coords.assign(2, {});
  std::uint64_t edge_index = 0;
  for (const Edge& e : edges) {
    auto rng = RngStream::from_tags({seed, kFaceTag, 0xedull, edge_index,
                                     round});
    for (int i = 0; i < points_per_edge; ++i) {
      double s = rng.next_unit();
      pb.coords[0].push_back(e.x0 + s * (e.x1 - e.x0));
      pb.coords[1].push_back(e.y0 + s * (e.y1 - e.y0));
      pb.target.push_back(0.0);
    }
    ++edge_index;
  }
  return pb;
}

}  // namespace spinn::pde
