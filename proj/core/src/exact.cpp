#include <cmath>
#include <functional>

#include "spinn/errors.hpp"
#include "spinn/jet.hpp"
#include "spinn/pde.hpp"

// Manufactured solutions, their derivative grids, and the coordinate-only
// residual fields. Separable solutions are stored as sums of per-axis factor
// products so any mixed partial is a product of per-axis factor jets.

namespace spinn::pde {

namespace {

using Factor = std::function<Jet<double>(const Jet<double>&)>;

struct SepTerm {
  double coef = 1.0;
  std::vector<Factor> factors;
};

struct SeparableExact {
  std::vector<std::vector<SepTerm>> comps;  // [component][term]
};

Factor f_one() {
  return [](const Jet<double>& x) { return jet_const(1.0, x.order); };
}
Factor f_id() {
  return [](const Jet<double>& x) { return x; };
}
Factor f_sq() {
  return [](const Jet<double>& x) { return x * x; };
}
Factor f_sin(double a) {
  return [a](const Jet<double>& x) { return sin(x * a); };
}
Factor f_cos(double a) {
  return [a](const Jet<double>& x) { return cos(x * a); };
}
Factor f_exp(double a) {
  return [a](const Jet<double>& x) { return exp(x * a); };
}

constexpr double kNu4d = 0.05;

const SeparableExact& exact_form(ProblemId id) {
  static const SeparableExact helm{
      {{{1.0, {f_sin(4 * M_PI), f_sin(4 * M_PI), f_sin(3 * M_PI)}}}}};
  static const SeparableExact kg3{{{
      {1.0, {f_cos(2), f_id(), f_one()}},
      {1.0, {f_cos(2), f_one(), f_id()}},
      {1.0, {f_sin(2), f_id(), f_id()}},
  }}};
  static const SeparableExact kg4{{{
      {1.0, {f_cos(1), f_id(), f_one(), f_one()}},
      {1.0, {f_cos(1), f_one(), f_id(), f_one()}},
      {1.0, {f_cos(1), f_one(), f_one(), f_id()}},
      {1.0, {f_sin(1), f_id(), f_id(), f_id()}},
  }}};
  static const SeparableExact diff6 = [] {
    SeparableExact e;
    std::vector<SepTerm> terms;
    terms.push_back({10.0, {f_id(), f_one(), f_one(), f_one(), f_one(),
                            f_one()}});
    for (int i = 0; i < 5; ++i) {
      SepTerm t{1.0, {f_one(), f_one(), f_one(), f_one(), f_one(), f_one()}};
      t.factors[static_cast<std::size_t>(1 + i)] = f_sq();
      terms.push_back(std::move(t));
    }
    e.comps.push_back(std::move(terms));
    return e;
  }();
  static const SeparableExact ns4{{
      {{2.0, {f_exp(-9 * kNu4d), f_cos(2), f_sin(2), f_sin(1)}}},
      {{-1.0, {f_exp(-9 * kNu4d), f_sin(2), f_cos(2), f_sin(1)}}},
      {{-2.0, {f_exp(-9 * kNu4d), f_sin(2), f_sin(2), f_cos(1)}}},
  }};
  switch (id) {
    case ProblemId::helmholtz3d: return helm;
    case ProblemId::kg3d: return kg3;
    case ProblemId::kg4d: return kg4;
    case ProblemId::diffusion6d: return diff6;
    case ProblemId::ns4d: return ns4;
    default: throw NoReferenceError("problem has no analytic reference");
  }
}

const SeparableExact& ns4d_vorticity_form() {
  static const SeparableExact w{{
      {{-3.0, {f_exp(-9 * kNu4d), f_sin(2), f_cos(2), f_cos(1)}}},
      {{6.0, {f_exp(-9 * kNu4d), f_cos(2), f_sin(2), f_cos(1)}}},
      {{-6.0, {f_exp(-9 * kNu4d), f_cos(2), f_cos(2), f_sin(1)}}},
  }};
  return w;
}

// Accumulate coef * outer-product of per-axis columns into grid (row-major,
// axis 0 slowest).
void accumulate_outer(std::span<const std::vector<double>> cols, double coef,
                      std::vector<double>& grid) {
  const int d = static_cast<int>(cols.size());
  std::vector<double> partial{coef};
  for (int k = 0; k < d; ++k) {
    std::vector<double> next(partial.size() * cols[static_cast<std::size_t>(k)]
                                                  .size());
    std::size_t idx = 0;
    for (double pv : partial)
      for (double cv : cols[static_cast<std::size_t>(k)]) next[idx++] = pv * cv;
    partial = std::move(next);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] += partial[i];
}

std::vector<double> separable_partial(const SeparableExact& form, int comp,
                                      std::span<const int> alpha,
                                      const FactorizedBatch& batch) {
  const int d = batch.dim();
  std::vector<double> grid(batch.grid_size(), 0.0);
  for (const SepTerm& term : form.comps[static_cast<std::size_t>(comp)]) {
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      int o = alpha[static_cast<std::size_t>(i)];
      const auto& xs = batch.coords[static_cast<std::size_t>(i)];
      auto& col = cols[static_cast<std::size_t>(i)];
      col.resize(xs.size());
      for (std::size_t nidx = 0; nidx < xs.size(); ++nidx) {
        Jet<double> j = term.factors[static_cast<std::size_t>(i)](
            jet_seed(xs[nidx], o));
        col[nidx] = j.c[static_cast<std::size_t>(o)];
      }
    }
    accumulate_outer(cols, term.coef, grid);
  }
  return grid;
}

double separable_value(const SeparableExact& form, int comp,
                       std::span<const double> x) {
  double acc = 0.0;
  for (const SepTerm& term : form.comps[static_cast<std::size_t>(comp)]) {
    double prod = term.coef;
    for (std::size_t i = 0; i < x.size(); ++i)
      prod *= term.factors[i](jet_const(x[i], 0)).c[0];
    acc += prod;
  }
  return acc;
}

// Flow-mixing closed form (non-separable): u = -tanh(y/2 cos(wt) - x/2
// sin(wt)) with w depending on r = |(x,y)|; r clamped away from the origin.
struct FlowPoint {
  double u, ut, ux, uy;
};

constexpr double kVtMax = 0.385;
constexpr double kRMin = 1e-12;

double flow_w(double r) {
  double s = 1.0 / std::cosh(r);
  double vt = s * s * std::tanh(r);
  return vt / (kVtMax * r);
}

FlowPoint flow_eval(double t, double x, double y) {
  double r = std::max(std::sqrt(x * x + y * y), kRMin);
  double sech = 1.0 / std::cosh(r);
  double th = std::tanh(r);
  double vt = sech * sech * th;
  double w = vt / (kVtMax * r);
  // d(vt)/dr = sech^2 (sech^2 - 2 tanh^2)
  double dvt = sech * sech * (sech * sech - 2.0 * th * th);
  double dw = (dvt * r - vt) / (kVtMax * r * r);
  double wx = dw * x / r;
  double wy = dw * y / r;
  double c = std::cos(w * t), s = std::sin(w * t);
  double phi = 0.5 * y * c - 0.5 * x * s;
  double amp = 0.5 * y * s + 0.5 * x * c;
  double tphi = std::tanh(phi);
  double sech2 = 1.0 - tphi * tphi;
  FlowPoint out;
  out.u = -tphi;
  out.ut = -sech2 * (-w * amp);
  out.ux = -sech2 * (-0.5 * s - t * wx * amp);
  out.uy = -sech2 * (0.5 * c - t * wy * amp);
  return out;
}

template <class F>
void for_each_point(const FactorizedBatch& batch, F&& fn) {
  const int d = batch.dim();
  std::size_t total = batch.grid_size();
  std::vector<double> point(static_cast<std::size_t>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = d - 1; i >= 0; --i) {
      const auto& xs = batch.coords[static_cast<std::size_t>(i)];
      point[static_cast<std::size_t>(i)] = xs[rem % xs.size()];
      rem /= xs.size();
    }
    fn(flat, std::span<const double>(point));
  }
}

std::vector<double> flow_partial(std::span<const int> alpha,
                                 const FactorizedBatch& batch) {
  int which = -1;  // 0: value, 1: d/dt, 2: d/dx, 3: d/dy
  std::vector<int> z{0, 0, 0};
  if (alpha[0] == 0 && alpha[1] == 0 && alpha[2] == 0) which = 0;
  if (alpha[0] == 1 && alpha[1] == 0 && alpha[2] == 0) which = 1;
  if (alpha[0] == 0 && alpha[1] == 1 && alpha[2] == 0) which = 2;
  if (alpha[0] == 0 && alpha[1] == 0 && alpha[2] == 1) which = 3;
  require(which >= 0, "flow_mixing closed form supports value and first "
                      "derivatives only");
  std::vector<double> grid(batch.grid_size());
  for_each_point(batch, [&](std::size_t flat, std::span<const double> p) {
    FlowPoint fp = flow_eval(p[0], p[1], p[2]);
    grid[flat] = which == 0 ? fp.u : which == 1 ? fp.ut : which == 2 ? fp.ux
                                                                     : fp.uy;
  });
  return grid;
}

// Superposition of three gaussians used as the nonlinear-diffusion initial
// condition.
double gaussian_ic(double x, double y) {
  double a = 0.25 * std::exp(-10.0 * ((x - 0.2) * (x - 0.2) +
                                      (y - 0.3) * (y - 0.3)));
  double b = 0.40 * std::exp(-15.0 * ((x + 0.1) * (x + 0.1) +
                                      (y + 0.5) * (y + 0.5)));
  double c = 0.30 * std::exp(-20.0 * ((x + 0.5) * (x + 0.5) + y * y));
  return a + b + c;
}

}  // namespace

std::vector<double> exact_partial(const PdeProblem& problem, int component,
                                  std::span<const int> alpha,
                                  const FactorizedBatch& batch) {
  if (problem.id == ProblemId::flow_mixing) return flow_partial(alpha, batch);
  const SeparableExact& form = exact_form(problem.id);
  return separable_partial(form, component, alpha, batch);
}

SolutionGrid exact_solution(const PdeProblem& problem,
                            const FactorizedBatch& batch) {
  if (!problem.has_exact)
    throw NoReferenceError(problem.name + " has no analytic reference");
  std::vector<int> dims;
  for (const auto& c : batch.coords) dims.push_back(static_cast<int>(c.size()));
  SolutionGrid grid(dims, problem.out_components);
  std::vector<int> zeros(static_cast<std::size_t>(batch.dim()), 0);
  for (int c = 0; c < problem.out_components; ++c) {
    auto g = exact_partial(problem, c, zeros, batch);
    std::copy(g.begin(), g.end(), grid.component(c).begin());
  }
  return grid;
}

SolutionGrid ns4d_vorticity_reference(const FactorizedBatch& batch) {
  std::vector<int> dims;
  for (const auto& c : batch.coords) dims.push_back(static_cast<int>(c.size()));
  SolutionGrid grid(dims, 3);
  std::vector<int> zeros(4, 0);
  for (int c = 0; c < 3; ++c) {
    auto g = separable_partial(ns4d_vorticity_form(), c, zeros, batch);
    std::copy(g.begin(), g.end(), grid.component(c).begin());
  }
  return grid;
}

double exact_value(const PdeProblem& problem, int component,
                   std::span<const double> x) {
  if (problem.id == ProblemId::flow_mixing)
    return flow_eval(x[0], x[1], x[2]).u;
  return separable_value(exact_form(problem.id), component, x);
}

double face_target_value(const PdeProblem& problem, int component,
                         std::span<const double> x, bool is_initial) {
  if (is_initial) {
    switch (problem.id) {
      case ProblemId::kg3d: return x[1] + x[2];
      case ProblemId::kg4d: return x[1] + x[2] + x[3];
      case ProblemId::diffusion_nl3d: return gaussian_ic(x[1], x[2]);
      default: break;  // manufactured problems: initial data from the exact
    }
  }
  if (!problem.has_exact) return 0.0;  // zero Dirichlet walls
  return exact_value(problem, component, x);
}

std::vector<std::vector<double>> residual_const_fields(
    const PdeProblem& problem, const FactorizedBatch& batch) {
  std::vector<std::vector<double>> fields;
  switch (problem.id) {
    case ProblemId::helmholtz3d: {
      // q = (k^2 - pi^2 (a1^2+a2^2+a3^2)) * u_exact, k=1, a=(4,4,3)
      const double factor = 1.0 - M_PI * M_PI * (16.0 + 16.0 + 9.0);
      std::vector<double> q(batch.grid_size());
      for_each_point(batch, [&](std::size_t flat, std::span<const double> p) {
        q[flat] = factor * exact_value(problem, 0, p);
      });
      fields.push_back(std::move(q));
      break;
    }
    case ProblemId::kg3d:
    case ProblemId::kg4d: {
      // f = u_tt + u^2 with u_tt = c_tt * u (spatial laplacian vanishes)
      const double c_tt = problem.id == ProblemId::kg3d ? -4.0 : -1.0;
      std::vector<double> f(batch.grid_size());
      for_each_point(batch, [&](std::size_t flat, std::span<const double> p) {
        double u = exact_value(problem, 0, p);
        f[flat] = c_tt * u + u * u;
      });
      fields.push_back(std::move(f));
      break;
    }
    case ProblemId::flow_mixing: {
      std::vector<double> a(batch.grid_size()), b(batch.grid_size());
      for_each_point(batch, [&](std::size_t flat, std::span<const double> p) {
        double x = p[1], y = p[2];
        double r = std::max(std::sqrt(x * x + y * y), kRMin);
        double w = flow_w(r);
        a[flat] = -w * y;
        b[flat] = w * x;
      });
      fields.push_back(std::move(a));
      fields.push_back(std::move(b));
      break;
    }
    case ProblemId::ns4d: {
      const double nu = kNu4d;
      std::vector<double> f1(batch.grid_size()), f2(batch.grid_size()),
          f3(batch.grid_size());
      for_each_point(batch, [&](std::size_t flat, std::span<const double> p) {
        double decay = std::exp(-18.0 * nu * p[0]);
        f1[flat] = -6.0 * decay * std::sin(4.0 * p[2]) * std::sin(2.0 * p[3]);
        f2[flat] = -6.0 * decay * std::sin(4.0 * p[1]) * std::sin(2.0 * p[3]);
        f3[flat] = 6.0 * decay * std::sin(4.0 * p[1]) * std::sin(4.0 * p[2]);
      });
      fields.push_back(std::move(f1));
      fields.push_back(std::move(f2));
      fields.push_back(std::move(f3));
      break;
    }
    default: break;
  }
  return fields;
}

}  // namespace spinn::pde
