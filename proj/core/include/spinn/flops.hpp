#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinn/errors.hpp"

namespace spinn::flops {

struct OpCount {
  std::int64_t adds = 0;
  std::int64_t mults = 0;

  std::int64_t flops() const { return adds + mults; }
  OpCount operator+(const OpCount& o) const {
    return {adds + o.adds, mults + o.mults};
  }
  OpCount scaled(std::int64_t a_factor, std::int64_t m_factor) const {
    return {adds * a_factor, mults * m_factor};
  }
};

enum class ArchKind { separable, monolithic };

// Architecture whose evaluation cost is counted analytically. The separable
// kind uses d body nets of the given shape plus the rank-wise feature merge;
// the monolithic kind is a single net taking all d coordinates at once.
struct ArchSpec {
  ArchKind kind = ArchKind::separable;
  int d = 3;
  std::vector<int> points_per_axis;  // N_i
  int depth = 4;   // hidden stack; 0 means a single dense map
  int width = 64;
  int out_dim = 32;
  int rank = 32;
  int m = 1;
  bool include_merge = true;

  std::int64_t grid_points() const {
    std::int64_t n = 1;
    for (int p : points_per_axis) n *= p;
    return n;
  }
  std::int64_t axis_points() const {
    std::int64_t n = 0;
    for (int p : points_per_axis) n += p;
    return n;
  }
};

struct CountTable {
  OpCount forward;
  OpCount first;
  OpCount second;
  OpCount total() const { return forward + first + second; }
};

// Exact integer operation counts for the forward pass and the first/second
// derivative evaluations. Counting conventions (frozen constants, calibrated
// once against the reference configuration and documented in flops.cpp):
// dense layers cost n_in*n_out multiply-accumulate pairs, tanh costs 4 flops
// per unit, forward-mode derivative sweeps cost 2x/4x the forward pass, and
// reverse-mode sweeps cost (4x adds, 2x mults) / (6x adds, 4x mults).
CountTable count_ops(const ArchSpec& spec);

/// Ratio of total flops, separable over monolithic.
double cost_ratio(const ArchSpec& sep, const ArchSpec& non);

struct TableEntry {
  std::string label;
  ArchSpec spec;
  CountTable counts;
};

/// The built-in two-architecture comparison: 3 body nets (4x64, 32 features)
/// at 64 points per axis versus one 5x128 net on the same 64^3 grid.
std::vector<TableEntry> reference_table();

std::string format_text(const std::vector<TableEntry>& entries);
std::string format_csv(const std::vector<TableEntry>& entries);

}  // namespace spinn::flops
