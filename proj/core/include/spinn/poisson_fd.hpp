#pragma once

#include <cstdint>
#include <vector>

namespace spinn::pde {

// Five-point finite-difference solution of -laplacian(u) = 1 on the L-shaped
// domain [-1,1]^2 \ [0,1]^2 with zero Dirichlet boundary, solved on an n x n
// uniform grid over the bounding box. Reference field for the L-shaped
// Poisson benchmark (no analytic solution exists).
struct PoissonFdSolution {
  int n = 0;
  std::vector<double> u;             // n*n row-major (x slowest), 0 outside
  std::vector<std::uint8_t> inside;  // L-domain membership per node
};

PoissonFdSolution solve_poisson_lshape_fd(int n);

}  // namespace spinn::pde
