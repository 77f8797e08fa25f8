#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinn/jet.hpp"
#include "spinn/params.hpp"
#include "spinn/tape.hpp"

namespace spinn {

enum class MlpVariant : std::uint8_t { plain = 0, modified = 1 };

// One per-axis body network mapping a scalar coordinate to out_dim features.
// depth counts hidden tanh layers; the affine stack is
// 1 -> width, (depth-1) x (width -> width), width -> out_dim.
struct MlpConfig {
  int depth = 4;
  int width = 64;
  int out_dim = 32;
  MlpVariant variant = MlpVariant::plain;
  std::uint64_t seed = 0;

  void validate() const {
    require(depth >= 1, "depth must be >= 1");
    require(width >= 1, "width must be >= 1");
    require(out_dim >= 1, "out_dim must be >= 1");
  }
};

std::size_t param_count(const MlpConfig& cfg);

struct AffineOffsets {
  std::size_t w = 0;  // row-major [n_out][n_in]
  std::size_t b = 0;
  int n_in = 0;
  int n_out = 0;
};

struct BodyNet {
  MlpConfig cfg;
  std::vector<AffineOffsets> stack;  // input, hidden..., output affine
  AffineOffsets gate_u, gate_v;      // modified variant only
};

/// Glorot-uniform weights, zero biases; deterministic under cfg.seed.
BodyNet init_mlp(const MlpConfig& cfg, ParamStore& store,
                 const std::string& prefix = "net");

/// Jet-valued forward pass: coefficients carry the per-axis derivatives of
/// every output feature up to x.order.
std::vector<Jet<double>> forward_jet(const BodyNet& net, const ParamStore& ps,
                                     const Jet<double>& x);

// Traced forward pass for one sample. Emits tape ops reading parameter nodes
// (the store must be bound at node 0) and writes the out_dim feature jets to
// out_base + k*out_stride + j, matching the axis feature block layout.
void trace_forward_jet(Tape& t, const BodyNet& net, double x, int order,
                       NodeId out_base, std::uint32_t out_stride);

}  // namespace spinn
