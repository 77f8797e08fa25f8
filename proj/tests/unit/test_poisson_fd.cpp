#include <doctest.h>

#include <cmath>

#include "spinn/pde.hpp"
#include "spinn/poisson_fd.hpp"

using namespace spinn::pde;

TEST_CASE("fd solution satisfies the stencil in the interior") {
  auto sol = solve_poisson_lshape_fd(41);
  int n = sol.n;
  double h = 2.0 / (n - 1);
  auto at = [&](int i, int j) { return sol.u[static_cast<std::size_t>(i * n + j)]; };
  double worst = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      double x = -1.0 + h * i, y = -1.0 + h * j;
      if (x >= 0.0 && y >= 0.0) continue;  // outside / boundary of the L
      double lap = (4.0 * at(i, j) - at(i - 1, j) - at(i + 1, j) -
                    at(i, j - 1) - at(i, j + 1)) /
                   (h * h);
      worst = std::max(worst, std::abs(lap - 1.0));
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("fd solution is symmetric and positive") {
  auto sol = solve_poisson_lshape_fd(81);
  int n = sol.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = sol.u[static_cast<std::size_t>(i * n + j)];
      CHECK(v >= -1e-14);
      // domain and operator are symmetric under (x,y) swap
      CHECK(v == doctest::Approx(sol.u[static_cast<std::size_t>(j * n + i)])
                     .epsilon(1e-10));
    }
}

TEST_CASE("fd solutions agree across resolutions at shared nodes") {
  auto coarse = solve_poisson_lshape_fd(51);
  auto fine = solve_poisson_lshape_fd(101);
  // node (i,j) of the 51 grid coincides with (2i,2j) of the 101 grid
  double worst = 0.0;
  for (int i = 0; i < 51; ++i)
    for (int j = 0; j < 51; ++j) {
      double a = coarse.u[static_cast<std::size_t>(i * 51 + j)];
      double b = fine.u[static_cast<std::size_t>((2 * i) * 101 + 2 * j)];
      worst = std::max(worst, std::abs(a - b));
    }
  // second-order scheme: discretization gap, not solver noise
  CHECK(worst < 5e-3);
  CHECK(worst > 0.0);
}

TEST_CASE("inside mask matches the domain predicate") {
  auto sol = solve_poisson_lshape_fd(21);
  int n = sol.n;
  double h = 2.0 / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = -1.0 + h * i, y = -1.0 + h * j;
      CHECK(static_cast<bool>(
                sol.inside[static_cast<std::size_t>(i * n + j)]) ==
            lshape_inside(x, y));
    }
}
