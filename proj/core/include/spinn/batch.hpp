#pragma once

#include <cstddef>
#include <vector>

#include "spinn/errors.hpp"

namespace spinn {

struct AxisInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Per-axis 1-d coordinate arrays whose Cartesian product is the collocation
// grid. The implied grid of prod(N_i) points is never materialized.
struct FactorizedBatch {
  std::vector<std::vector<double>> coords;
  std::vector<AxisInterval> bounds;

  int dim() const { return static_cast<int>(coords.size()); }

  std::size_t axis_size(int i) const {
    return coords[static_cast<std::size_t>(i)].size();
  }

  std::size_t grid_size() const {
    std::size_t n = 1;
    for (const auto& c : coords) n *= c.size();
    return n;
  }

  void validate_inside() const {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto& b = bounds[i];
      for (double x : coords[i])
        require(x >= b.lo && x <= b.hi, "coordinate outside axis domain");
    }
  }
};

/// Uniform grid with inclusive endpoints, resolution points per axis.
inline std::vector<double> linspace(double lo, double hi, int n) {
  require(n >= 2, "linspace needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(n));
  double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

}  // namespace spinn
