#include "spinn/grid_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "spinn/errors.hpp"

namespace spinn {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'G', 'D'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t grid_binary_size(const SolutionGrid& grid) {
  return 16 + 4 * grid.dims.size() +
         8 * grid.points() * static_cast<std::size_t>(grid.m);
}

void write_grid_binary(const std::filesystem::path& path,
                       const SolutionGrid& grid) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(os.good(), "cannot open grid file for writing: " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(grid.dims.size()));
  put_u32(os, static_cast<std::uint32_t>(grid.m));
  for (int d : grid.dims) put_u32(os, static_cast<std::uint32_t>(d));
  for (double x : grid.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
      b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
  require(os.good(), "grid write failed: " + path.string());
}

SolutionGrid read_grid_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open grid file: " + path.string());
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, kMagic, 4) == 0,
          "not a grid file: " + path.string());
  require(get_u32(is) == kVersion, "unsupported grid file version");
  int d = static_cast<int>(get_u32(is));
  int m = static_cast<int>(get_u32(is));
  require(d >= 1 && d <= 16 && m >= 1, "corrupt grid header");
  std::vector<int> dims;
  for (int i = 0; i < d; ++i) dims.push_back(static_cast<int>(get_u32(is)));
  SolutionGrid grid(dims, m);
  for (double& x : grid.data) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    std::memcpy(&x, &bits, 8);
  }
  require(is.good(), "truncated grid file: " + path.string());
  return grid;
}

void write_grid_csv(const std::filesystem::path& path,
                    const FactorizedBatch& batch, const SolutionGrid& grid,
                    std::span<const std::string> axis_names) {
  std::ofstream os(path, std::ios::trunc);
  require(os.good(), "cannot open csv for writing: " + path.string());
  const int d = batch.dim();
  for (int i = 0; i < d; ++i) {
    os << (i < static_cast<int>(axis_names.size())
               ? axis_names[static_cast<std::size_t>(i)]
               : "x" + std::to_string(i + 1));
    os << ',';
  }
  if (grid.m == 1) {
    os << "value\n";
  } else {
    for (int c = 0; c < grid.m; ++c)
      os << "value" << c << (c + 1 < grid.m ? ',' : '\n');
  }
  std::size_t total = grid.points();
  char buf[64];
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    std::size_t stride = total;
    for (int i = 0; i < d; ++i) {
      const auto& xs = batch.coords[static_cast<std::size_t>(i)];
      stride /= xs.size();
      std::size_t idx = rem / stride;
      rem %= stride;
      std::snprintf(buf, sizeof(buf), "%.17g,", xs[idx]);
      os << buf;
    }
    for (int c = 0; c < grid.m; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid.component(c)[flat]);
      os << buf << (c + 1 < grid.m ? ',' : '\n');
    }
  }
  require(os.good(), "csv write failed: " + path.string());
}

void write_pgm(const std::filesystem::path& path,
               std::span<const double> plane, int rows, int cols) {
  require(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) ==
              plane.size(),
          "pgm plane size mismatch");
  double lo = plane[0], hi = plane[0];
  for (double v : plane) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span = hi - lo;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(os.good(), "cannot open pgm for writing: " + path.string());
  os << "P5\n" << cols << " " << rows << "\n255\n";
  for (double v : plane) {
    int g = span > 0.0 ? static_cast<int>(std::lround((v - lo) / span * 255.0))
                       : 0;
    os.put(static_cast<char>(g < 0 ? 0 : g > 255 ? 255 : g));
  }
  require(os.good(), "pgm write failed: " + path.string());
}

}  // namespace spinn
