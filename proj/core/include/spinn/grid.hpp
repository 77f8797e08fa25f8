#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spinn/errors.hpp"

namespace spinn {

// Dense solution tensor over a factorized grid. Each output component is a
// contiguous row-major plane (axis 0 slowest), planes stacked by component.
struct SolutionGrid {
  std::vector<int> dims;
  int m = 1;
  std::vector<double> data;

  SolutionGrid() = default;
  SolutionGrid(std::vector<int> d, int comps) : dims(std::move(d)), m(comps) {
    data.assign(points() * static_cast<std::size_t>(m), 0.0);
  }

  std::size_t points() const {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::span<double> component(int c) {
    return {data.data() + static_cast<std::size_t>(c) * points(), points()};
  }
  std::span<const double> component(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * points(), points()};
  }

  std::size_t flat_index(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      f = f * static_cast<std::size_t>(dims[i]) +
          static_cast<std::size_t>(idx[i]);
    return f;
  }

  double at(std::span<const int> idx, int c = 0) const {
    return component(c)[flat_index(idx)];
  }
};

}  // namespace spinn
