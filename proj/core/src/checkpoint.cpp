#include "spinn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace spinn {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'N', 'N'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_f64_span(std::ostream& os, std::span<const double> v) {
  for (double x : v) put_f64(os, x);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const SeparableModel& model, const AdamState* opt,
                     std::uint64_t step) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(os.good(), "cannot open checkpoint file for writing: " +
                         path.string());
  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(model.dim));
  put_u32(os, static_cast<std::uint32_t>(model.rank));
  put_u32(os, static_cast<std::uint32_t>(model.out_components));
  for (const auto& net : model.axes) {
    put_u32(os, static_cast<std::uint32_t>(net.cfg.depth));
    put_u32(os, static_cast<std::uint32_t>(net.cfg.width));
    put_u32(os, static_cast<std::uint32_t>(net.cfg.out_dim));
    put_u32(os, static_cast<std::uint32_t>(net.cfg.variant));
    put_u64(os, net.cfg.seed);
  }
  put_u64(os, model.params.size());
  put_f64_span(os, model.params.values());
  const bool has_opt = opt != nullptr;
  os.put(has_opt ? 1 : 0);
  if (has_opt) {
    put_u64(os, static_cast<std::uint64_t>(opt->t));
    put_f64_span(os, opt->m);
    put_f64_span(os, opt->v);
  }
  put_u64(os, step);
  require(os.good(), "checkpoint write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open checkpoint: " + path.string());
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, kMagic, 4) == 0,
          "not a checkpoint file (bad magic): " + path.string());
  std::uint32_t version = get_u32(is);
  require(version == kCheckpointVersion,
          "unsupported checkpoint version " + std::to_string(version));
  int d = static_cast<int>(get_u32(is));
  int rank = static_cast<int>(get_u32(is));
  int m = static_cast<int>(get_u32(is));
  require(d >= 2 && d <= 16, "corrupt checkpoint: bad dimension");
  std::vector<MlpConfig> cfgs;
  for (int i = 0; i < d; ++i) {
    MlpConfig c;
    c.depth = static_cast<int>(get_u32(is));
    c.width = static_cast<int>(get_u32(is));
    c.out_dim = static_cast<int>(get_u32(is));
    c.variant = static_cast<MlpVariant>(get_u32(is));
    c.seed = get_u64(is);
    cfgs.push_back(c);
  }
  LoadedCheckpoint out{make_model(cfgs, rank, m), std::nullopt, 0};
  std::uint64_t n = get_u64(is);
  require(n == out.model.params.size(),
          "corrupt checkpoint: parameter count mismatch");
  for (auto& x : out.model.params.values()) x = get_f64(is);
  int has_opt = is.get();
  require(has_opt == 0 || has_opt == 1, "corrupt checkpoint: optimizer flag");
  if (has_opt == 1) {
    AdamState st;
    st.t = static_cast<std::int64_t>(get_u64(is));
    st.m.resize(n);
    st.v.resize(n);
    for (auto& x : st.m) x = get_f64(is);
    for (auto& x : st.v) x = get_f64(is);
    out.opt = std::move(st);
  }
  out.step = get_u64(is);
  require(is.good(), "truncated checkpoint: " + path.string());
  return out;
}

}  // namespace spinn
