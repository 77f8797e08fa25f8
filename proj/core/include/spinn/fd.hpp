#pragma once

#include <functional>

#include "spinn/errors.hpp"

namespace spinn {

/// Central finite-difference estimate of f^(order)(x), order 1 or 2.
/// Used as the independent oracle against jet and tape derivatives.
template <class F>
double fd_derivative(F&& f, double x, int order, double h) {
  require(h > 0.0, "fd_derivative requires h > 0");
  switch (order) {
    case 1: return (f(x + h) - f(x - h)) / (2.0 * h);
    case 2: return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    default: throw ConfigError("fd_derivative supports order 1 or 2");
  }
}

/// Scale-protected relative error used by the finite-difference checks.
inline double rel_err(double got, double want) {
  double scale = 1.0;
  if (std::abs(got) > scale) scale = std::abs(got);
  if (std::abs(want) > scale) scale = std::abs(want);
  return std::abs(got - want) / scale;
}

}  // namespace spinn
