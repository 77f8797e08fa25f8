#include "spinn/net.hpp"

#include <cmath>

#include "spinn/rng.hpp"

namespace spinn {

std::size_t param_count(const MlpConfig& cfg) {
  auto aff = [](std::size_t n_in, std::size_t n_out) {
    return n_in * n_out + n_out;
  };
  std::size_t w = static_cast<std::size_t>(cfg.width);
  std::size_t out = static_cast<std::size_t>(cfg.out_dim);
  std::size_t total = aff(1, w);  // input layer
  total += static_cast<std::size_t>(cfg.depth - 1) * aff(w, w);
  total += aff(w, out);
  if (cfg.variant == MlpVariant::modified) total += 2 * aff(1, w);
  return total;
}

namespace {

AffineOffsets add_affine(ParamStore& store, const std::string& name, int n_in,
                         int n_out, RngStream& rng) {
  AffineOffsets a;
  a.n_in = n_in;
  a.n_out = n_out;
  a.w = store.add(name + "/W", static_cast<std::size_t>(n_out),
                  static_cast<std::size_t>(n_in));
  a.b = store.add(name + "/b", static_cast<std::size_t>(n_out), 1);
  double bound = std::sqrt(6.0 / (n_in + n_out));
  auto w = store.slice(*store.find(name + "/W"));
  for (auto& x : w) x = rng.uniform(-bound, bound);
  return a;
}

}  // namespace

BodyNet init_mlp(const MlpConfig& cfg, ParamStore& store,
                 const std::string& prefix) {
  cfg.validate();
  BodyNet net;
  net.cfg = cfg;
  RngStream rng = RngStream::from_tags({cfg.seed, 0x6e657473ull});  // "nets"
  if (cfg.variant == MlpVariant::modified) {
    net.gate_u = add_affine(store, prefix + "/U", 1, cfg.width, rng);
    net.gate_v = add_affine(store, prefix + "/V", 1, cfg.width, rng);
  }
  net.stack.push_back(add_affine(store, prefix + "/in", 1, cfg.width, rng));
  for (int k = 1; k < cfg.depth; ++k)
    net.stack.push_back(add_affine(store, prefix + "/h" + std::to_string(k),
                                   cfg.width, cfg.width, rng));
  net.stack.push_back(
      add_affine(store, prefix + "/out", cfg.width, cfg.out_dim, rng));
  return net;
}

namespace {

using JetVec = std::vector<Jet<double>>;

JetVec affine_jets(const ParamStore& ps, const AffineOffsets& a,
                   const JetVec& in) {
  const double* w = ps.data() + a.w;
  const double* b = ps.data() + a.b;
  JetVec out(static_cast<std::size_t>(a.n_out));
  int order = in[0].order;
  for (int o = 0; o < a.n_out; ++o) {
    Jet<double> acc = jet_const(b[o], order);
    const double* wrow = w + static_cast<std::size_t>(o) * a.n_in;
    for (int i = 0; i < a.n_in; ++i)
      acc = acc + in[static_cast<std::size_t>(i)] * wrow[i];
    out[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

JetVec tanh_jets(const JetVec& in) {
  JetVec out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = tanh(in[i]);
  return out;
}

}  // namespace

std::vector<Jet<double>> forward_jet(const BodyNet& net, const ParamStore& ps,
                                     const Jet<double>& x) {
  JetVec h{x};
  if (net.cfg.variant == MlpVariant::plain) {
    for (std::size_t l = 0; l + 1 < net.stack.size(); ++l)
      h = tanh_jets(affine_jets(ps, net.stack[l], h));
    return affine_jets(ps, net.stack.back(), h);
  }
  // Modified variant: two gate streams mixed into every hidden layer.
  JetVec u = tanh_jets(affine_jets(ps, net.gate_u, h));
  JetVec v = tanh_jets(affine_jets(ps, net.gate_v, h));
  JetVec hidden = tanh_jets(affine_jets(ps, net.stack[0], h));
  for (std::size_t l = 1; l + 1 < net.stack.size(); ++l) {
    JetVec z = tanh_jets(affine_jets(ps, net.stack[l], hidden));
    for (std::size_t i = 0; i < hidden.size(); ++i)
      hidden[i] = (1.0 - z[i]) * u[i] + z[i] * v[i];
  }
  return affine_jets(ps, net.stack.back(), hidden);
}

namespace {

// Tape-side jet block: ncoef coefficient slices of `width` nodes each,
// packed coeff-major so jet_affine can consume it directly.
struct JetBlock {
  Range block;
  std::uint32_t width = 0;
  std::uint32_t ncoef = 1;

  Range slice(std::uint32_t k) const {
    return Range{block.base + k * width, width};
  }
};

JetBlock reserve_block(Tape& t, std::uint32_t width, std::uint32_t ncoef) {
  return JetBlock{t.reserve(width * ncoef), width, ncoef};
}

JetBlock traced_affine(Tape& t, const AffineOffsets& a, Range in,
                       std::uint32_t ncoef) {
  JetBlock out = reserve_block(t, static_cast<std::uint32_t>(a.n_out), ncoef);
  t.emit_jet_affine(JetAffineArgs{
      static_cast<std::uint32_t>(a.n_in), static_cast<std::uint32_t>(a.n_out),
      ncoef, static_cast<NodeId>(a.w), static_cast<NodeId>(a.b), in.base,
      out.block.base, out.width});
  return out;
}

void traced_affine_to(Tape& t, const AffineOffsets& a, Range in,
                      std::uint32_t ncoef, NodeId out_base,
                      std::uint32_t out_stride) {
  t.emit_jet_affine(JetAffineArgs{
      static_cast<std::uint32_t>(a.n_in), static_cast<std::uint32_t>(a.n_out),
      ncoef, static_cast<NodeId>(a.w), static_cast<NodeId>(a.b), in.base,
      out_base, out_stride});
}

// Mirrors Jet tanh through jet_compose; op sequence is kept identical to the
// scalar path so traced and plain passes agree bit for bit.
JetBlock traced_tanh(Tape& t, const JetBlock& z) {
  JetBlock out = reserve_block(t, z.width, z.ncoef);
  Range t0 = out.slice(0);
  t.tanh_into(t0, z.slice(0));
  if (z.ncoef == 1) return out;
  Range s = t.rsub_const(1.0, t.square(t0));
  t.mul_into(out.slice(1), s, z.slice(1));
  if (z.ncoef == 2) return out;
  Range f2 = t.scale(t.mul(t0, s), -2.0);
  Range z1sq = t.square(z.slice(1));
  t.add_into(out.slice(2), t.mul(s, z.slice(2)), t.mul(f2, z1sq));
  if (z.ncoef == 3) return out;
  Range f3 = t.mul(s, t.add_const(t.scale(t.square(t0), 6.0), -2.0));
  Range part = t.add(t.mul(s, z.slice(3)),
                     t.scale(t.mul(f2, t.mul(z.slice(1), z.slice(2))), 3.0));
  t.add_into(out.slice(3), part, t.mul(f3, t.mul(z1sq, z.slice(1))));
  return out;
}

// Leibniz product of two jet blocks, matching Jet operator* term order.
JetBlock traced_jmul(Tape& t, const JetBlock& a, const JetBlock& b) {
  JetBlock out = reserve_block(t, a.width, a.ncoef);
  t.mul_into(out.slice(0), a.slice(0), b.slice(0));
  if (a.ncoef >= 2)
    t.add_into(out.slice(1), t.mul(a.slice(1), b.slice(0)),
               t.mul(a.slice(0), b.slice(1)));
  if (a.ncoef >= 3)
    t.add_into(out.slice(2),
               t.add(t.mul(a.slice(2), b.slice(0)),
                     t.scale(t.mul(a.slice(1), b.slice(1)), 2.0)),
               t.mul(a.slice(0), b.slice(2)));
  if (a.ncoef >= 4)
    t.add_into(out.slice(3),
               t.add(t.add(t.mul(a.slice(3), b.slice(0)),
                           t.scale(t.mul(a.slice(2), b.slice(1)), 3.0)),
                     t.scale(t.mul(a.slice(1), b.slice(2)), 3.0)),
               t.mul(a.slice(0), b.slice(3)));
  return out;
}

JetBlock traced_jadd(Tape& t, const JetBlock& a, const JetBlock& b) {
  JetBlock out = reserve_block(t, a.width, a.ncoef);
  for (std::uint32_t k = 0; k < a.ncoef; ++k)
    t.add_into(out.slice(k), a.slice(k), b.slice(k));
  return out;
}

JetBlock traced_one_minus(Tape& t, const JetBlock& a) {
  JetBlock out = reserve_block(t, a.width, a.ncoef);
  t.rsub_const_into(out.slice(0), 1.0, a.slice(0));
  for (std::uint32_t k = 1; k < a.ncoef; ++k)
    t.neg_into(out.slice(k), a.slice(k));
  return out;
}

}  // namespace

void trace_forward_jet(Tape& t, const BodyNet& net, double x, int order,
                       NodeId out_base, std::uint32_t out_stride) {
  Jet<double>::check_order(order);
  auto ncoef = static_cast<std::uint32_t>(order + 1);
  double seedv[4] = {x, 1.0, 0.0, 0.0};
  JetBlock in{t.constants({seedv, ncoef}), 1, ncoef};

  if (net.cfg.variant == MlpVariant::plain) {
    JetBlock h = in;
    for (std::size_t l = 0; l + 1 < net.stack.size(); ++l)
      h = traced_tanh(t, traced_affine(t, net.stack[l], h.block, ncoef));
    traced_affine_to(t, net.stack.back(), h.block, ncoef, out_base,
                     out_stride);
    return;
  }
  JetBlock u = traced_tanh(t, traced_affine(t, net.gate_u, in.block, ncoef));
  JetBlock v = traced_tanh(t, traced_affine(t, net.gate_v, in.block, ncoef));
  JetBlock h = traced_tanh(t, traced_affine(t, net.stack[0], in.block, ncoef));
  for (std::size_t l = 1; l + 1 < net.stack.size(); ++l) {
    JetBlock z = traced_tanh(t, traced_affine(t, net.stack[l], h.block, ncoef));
    h = traced_jadd(t, traced_jmul(t, traced_one_minus(t, z), u),
                    traced_jmul(t, z, v));
  }
  traced_affine_to(t, net.stack.back(), h.block, ncoef, out_base, out_stride);
}

}  // namespace spinn
