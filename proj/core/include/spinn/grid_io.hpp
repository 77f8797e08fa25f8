#pragma once

#include <filesystem>

#include "spinn/batch.hpp"
#include "spinn/grid.hpp"

namespace spinn {

// Binary grid export: magic "SPGD", format version, d, m, per-axis sizes,
// then the f64 data planes little-endian. File length is
// 16 + 4*d + 8 * points * m bytes.
void write_grid_binary(const std::filesystem::path& path,
                       const SolutionGrid& grid);
SolutionGrid read_grid_binary(const std::filesystem::path& path);
std::size_t grid_binary_size(const SolutionGrid& grid);

/// CSV rows "x1,...,xd,value[,value2,...]" with one header line.
void write_grid_csv(const std::filesystem::path& path,
                    const FactorizedBatch& batch, const SolutionGrid& grid,
                    std::span<const std::string> axis_names);

// Binary PGM (P5) heatmap of a 2-d plane, min-max normalized to 8 bits per
// slice; constant planes map to 0.
void write_pgm(const std::filesystem::path& path,
               std::span<const double> plane, int rows, int cols);

}  // namespace spinn
