#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinn/errors.hpp"

namespace spinn {

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

// Flat f64 parameter array with named, disjoint slices that cover it.
// The trainer binds the whole array to tape nodes [0, size()), so slice
// offsets double as node ids during a traced step.
class ParamStore {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols) {
    std::size_t off = data_.size();
    slices_.push_back(ParamSlice{std::move(name), off, rows, cols});
    data_.resize(off + rows * cols, 0.0);
    return off;
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> slice(const ParamSlice& s) {
    return {data_.data() + s.offset, s.size()};
  }

  const ParamSlice* find(std::string_view name) const {
    for (const auto& s : slices_)
      if (s.name == name) return &s;
    return nullptr;
  }

  const std::vector<ParamSlice>& slices() const { return slices_; }

 private:
  std::vector<double> data_;
  std::vector<ParamSlice> slices_;
};

}  // namespace spinn
