#include "spinn/poisson_fd.hpp"

#include <cmath>

#include "spinn/errors.hpp"
#include "spinn/pde.hpp"

namespace spinn::pde {

namespace {

// Conjugate gradients on the implicitly assembled five-point system.
// Unknowns are the strict-interior L-domain nodes; Dirichlet nodes stay 0.
struct FdSystem {
  int n;
  double h;
  std::vector<std::int32_t> index;  // node -> unknown id (-1 for Dirichlet)
  std::vector<std::int32_t> nodes;  // unknown id -> node

  std::size_t unknowns() const { return nodes.size(); }

  void matvec(const std::vector<double>& x, std::vector<double>& y) const {
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t u = 0; u < nodes.size(); ++u) {
      std::int32_t node = nodes[u];
      int i = node / n, j = node % n;
      double acc = 4.0 * x[u];
      auto take = [&](int ii, int jj) -> double {
        std::int32_t id = index[static_cast<std::size_t>(ii * n + jj)];
        return id < 0 ? 0.0 : x[static_cast<std::size_t>(id)];
      };
      acc -= take(i - 1, j) + take(i + 1, j) + take(i, j - 1) + take(i, j + 1);
      y[u] = acc * inv_h2;
    }
  }
};

}  // namespace

PoissonFdSolution solve_poisson_lshape_fd(int n) {
  require(n >= 3, "grid must have at least 3 nodes per axis");
  PoissonFdSolution sol;
  sol.n = n;
  sol.u.assign(static_cast<std::size_t>(n) * n, 0.0);
  sol.inside.assign(static_cast<std::size_t>(n) * n, 0);

  FdSystem sys;
  sys.n = n;
  sys.h = 2.0 / (n - 1);
  sys.index.assign(static_cast<std::size_t>(n) * n, -1);
  auto coord = [&](int i) { return -1.0 + sys.h * i; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = coord(i), y = coord(j);
      std::size_t node = static_cast<std::size_t>(i * n + j);
      sol.inside[node] = lshape_inside(x, y) ? 1 : 0;
      bool interior = i > 0 && i < n - 1 && j > 0 && j < n - 1 &&
                      !(x >= 0.0 && y >= 0.0);
      if (interior) {
        sys.index[node] = static_cast<std::int32_t>(sys.nodes.size());
        sys.nodes.push_back(static_cast<std::int32_t>(i * n + j));
      }
    }

  const std::size_t m = sys.unknowns();
  std::vector<double> x(m, 0.0), r(m, 1.0), p(m, 1.0), ap(m);
  double rr = static_cast<double>(m);  // r = b = 1 everywhere initially
  const double tol2 = rr * 1e-24;
  for (std::size_t it = 0; it < 20 * m && rr > tol2; ++it) {
    sys.matvec(p, ap);
    double pap = 0.0;
    for (std::size_t k = 0; k < m; ++k) pap += p[k] * ap[k];
    double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
      rr_new += r[k] * r[k];
    }
    double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < m; ++k) p[k] = r[k] + beta * p[k];
  }

  for (std::size_t u = 0; u < m; ++u)
    sol.u[static_cast<std::size_t>(sys.nodes[u])] = x[u];
  return sol;
}

}  // namespace spinn::pde
