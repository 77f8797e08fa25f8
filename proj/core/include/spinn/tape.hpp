#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spinn/errors.hpp"
#include "spinn/jet.hpp"

namespace spinn {

using NodeId = std::uint32_t;

struct Range {
  NodeId base = 0;
  std::uint32_t len = 0;
};

// One recorded operation over node ranges. Scalars are ranges of length 1;
// fused kinds (jet_affine, merge_sep, merge_point) carry extra layout in the
// aux pools. The tape is append-only and executes ops in emission order, so
// every input of an op is already computed when the op runs.
enum class OpKind : std::uint8_t {
  add,
  sub,
  mul,
  div,
  neg,
  tanh_fn,
  exp_fn,
  sin_fn,
  cos_fn,
  square,
  scale,       // out = c * a
  add_const,   // out = a + c
  rsub_const,  // out = c - a
  sum,         // out = sum(a)
  mean_sq,     // out = sum(a_i^2) / c
  mean_sq_masked,
  jet_affine,
  merge_sep,
  merge_point,
};

struct Op {
  OpKind kind;
  Range out;
  Range a;
  Range b;
  std::uint32_t auxf = 0;
  std::uint32_t auxi = 0;
};

// Dense affine map applied coefficient-wise to a block of jets.
// Input layout: coeff-major, in + k*n_in + i. Output coefficient block k
// starts at out + k*out_stride (strided so the last layer of a network can
// interleave samples inside an axis feature block).
struct JetAffineArgs {
  std::uint32_t n_in = 0;
  std::uint32_t n_out = 0;
  std::uint32_t ncoef = 1;
  NodeId w = 0;  // W row-major [n_out][n_in]
  NodeId b = 0;  // bias [n_out]
  NodeId in = 0;
  NodeId out = 0;
  std::uint32_t out_stride = 0;
};

// One axis of a feature block consumed by a merge: row i is the r contiguous
// nodes starting at rows + i*row_stride.
struct MergeAxisArgs {
  NodeId rows = 0;
  std::uint32_t n = 0;
  std::uint32_t row_stride = 0;
};

class Tape;

// Scalar handle with operator overloads; drives the same tape as the fused
// array ops, so small expressions and full training steps share one engine.
struct Var {
  Tape* tape = nullptr;
  NodeId id = 0;

  double value() const;
};

class Tape {
 public:
  Tape() = default;

  void reset();

  /// Parameters occupy nodes [0, p.size()); must be bound before other nodes.
  Range bind_params(std::span<const double> p);
  void refresh_params(std::span<const double> p);
  std::uint32_t num_params() const { return n_params_; }

  NodeId constant(double v);
  Range constants(std::span<const double> v);
  /// Uninitialized node block later filled by strided jet_affine outputs.
  Range reserve(std::uint32_t len);

  Var cvar(double v) { return Var{this, constant(v)}; }
  Var node_var(NodeId id) { return Var{this, id}; }

  // Elementwise ops; a and b must have equal length.
  Range add(Range a, Range b) { return ewise(OpKind::add, a, b); }
  Range sub(Range a, Range b) { return ewise(OpKind::sub, a, b); }
  Range mul(Range a, Range b) { return ewise(OpKind::mul, a, b); }
  Range div(Range a, Range b) { return ewise(OpKind::div, a, b); }
  Range neg(Range a) { return ewise(OpKind::neg, a, {}); }
  Range tanh(Range a) { return ewise(OpKind::tanh_fn, a, {}); }
  Range exp(Range a) { return ewise(OpKind::exp_fn, a, {}); }
  Range sin(Range a) { return ewise(OpKind::sin_fn, a, {}); }
  Range cos(Range a) { return ewise(OpKind::cos_fn, a, {}); }
  Range square(Range a) { return ewise(OpKind::square, a, {}); }
  Range scale(Range a, double c) { return ewise_c(OpKind::scale, a, c); }
  Range add_const(Range a, double c) { return ewise_c(OpKind::add_const, a, c); }
  Range rsub_const(double c, Range a) { return ewise_c(OpKind::rsub_const, a, c); }

  // In-place variants writing into a pre-reserved block, used to pack jet
  // coefficient slices contiguously.
  Range add_into(Range out, Range a, Range b) {
    return ewise_into(OpKind::add, out, a, b);
  }
  Range mul_into(Range out, Range a, Range b) {
    return ewise_into(OpKind::mul, out, a, b);
  }
  Range tanh_into(Range out, Range a) {
    return ewise_into(OpKind::tanh_fn, out, a, {});
  }
  Range neg_into(Range out, Range a) {
    return ewise_into(OpKind::neg, out, a, {});
  }
  Range rsub_const_into(Range out, double c, Range a) {
    return ewise_c_into(OpKind::rsub_const, out, a, c);
  }
  Range copy_scaled_into(Range out, Range a, double c) {
    return ewise_c_into(OpKind::scale, out, a, c);
  }

  NodeId sum(Range a);
  NodeId mean_sq(Range a, double divisor);
  NodeId mean_sq_masked(Range a, std::span<const std::uint8_t> mask,
                        double divisor);

  void emit_jet_affine(const JetAffineArgs& args);
  Range emit_merge_sep(std::span<const MergeAxisArgs> axes, std::uint32_t r);
  Range emit_merge_point(std::span<const MergeAxisArgs> axes, std::uint32_t r,
                         std::uint32_t n);

  /// Re-executes every recorded op (after refresh_params).
  void forward_all();

  /// Reverse sweep seeding d(out)/d(out) = 1. out must be a single node.
  void backward(NodeId out);
  void backward_scalar(Range out) {
    require(out.len == 1, "backward requires a scalar output node");
    backward(out.base);
  }

  double val(NodeId id) const { return vals_[id]; }
  std::span<const double> vals(Range r) const {
    return {vals_.data() + r.base, r.len};
  }
  double* mutable_vals(Range r) { return vals_.data() + r.base; }
  double adj(NodeId id) const { return adj_[id]; }
  std::span<const double> adjoints(Range r) const {
    return {adj_.data() + r.base, r.len};
  }
  /// Gradient of the last backward() output w.r.t. the bound parameters.
  std::span<const double> param_grad() const {
    return {adj_.data(), n_params_};
  }

  std::size_t node_count() const { return vals_.size(); }
  std::size_t op_count() const { return ops_.size(); }

  bool all_finite(Range r) const;

  Range ewise(OpKind kind, Range a, Range b);
  Range ewise_c(OpKind kind, Range a, double c);
  Range ewise_into(OpKind kind, Range out, Range a, Range b);
  Range ewise_c_into(OpKind kind, Range out, Range a, double c);

 private:
  Range alloc(std::uint32_t len);
  void exec(const Op& op);
  void exec_backward(const Op& op);

  std::vector<double> vals_;
  std::vector<double> adj_;
  std::vector<Op> ops_;
  std::vector<double> auxf_;
  std::vector<std::uint32_t> auxi_;
  std::vector<std::uint8_t> mask_pool_;
  std::vector<double> scratch_;
  std::uint32_t n_params_ = 0;
};

inline double Var::value() const { return tape->val(id); }

namespace detail {
inline Var bin(OpKind k, const Var& a, const Var& b) {
  Range r = a.tape->ewise(k, Range{a.id, 1}, Range{b.id, 1});
  return Var{a.tape, r.base};
}
inline Var un(OpKind k, const Var& a) {
  Range r = a.tape->ewise(k, Range{a.id, 1}, Range{});
  return Var{a.tape, r.base};
}
inline Var cop(OpKind k, const Var& a, double c) {
  Range r = a.tape->ewise_c(k, Range{a.id, 1}, c);
  return Var{a.tape, r.base};
}
inline double value_of(const Var& v) { return v.value(); }
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::bin(OpKind::add, a, b);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::bin(OpKind::sub, a, b);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::bin(OpKind::mul, a, b);
}
inline Var operator/(const Var& a, const Var& b) {
  return detail::bin(OpKind::div, a, b);
}
inline Var operator-(const Var& a) { return detail::un(OpKind::neg, a); }
inline Var operator*(const Var& a, double c) {
  return detail::cop(OpKind::scale, a, c);
}
inline Var operator*(double c, const Var& a) { return a * c; }
inline Var operator+(const Var& a, double c) {
  return detail::cop(OpKind::add_const, a, c);
}
inline Var operator+(double c, const Var& a) { return a + c; }
inline Var operator-(const Var& a, double c) { return a + (-c); }
inline Var operator-(double c, const Var& a) {
  return detail::cop(OpKind::rsub_const, a, c);
}
inline Var operator/(const Var& a, double c) { return a * (1.0 / c); }
inline Var operator/(double c, const Var& a) {
  return detail::bin(OpKind::div, Var{a.tape, a.tape->constant(c)}, a);
}
inline Var tanh(const Var& a) { return detail::un(OpKind::tanh_fn, a); }
inline Var exp(const Var& a) { return detail::un(OpKind::exp_fn, a); }
inline Var sin(const Var& a) { return detail::un(OpKind::sin_fn, a); }
inline Var cos(const Var& a) { return detail::un(OpKind::cos_fn, a); }

/// Seed a tape-backed jet from a constant coordinate: (x, 1, 0, ...).
inline Jet<Var> jet_seed(Tape& t, double x, int order) {
  Jet<Var> j(order);
  j.c[0] = t.cvar(x);
  for (int k = 1; k <= order; ++k) j.c[k] = t.cvar(k == 1 ? 1.0 : 0.0);
  return j;
}

inline Jet<Var> jet_const(Tape& t, double x, int order) {
  Jet<Var> j(order);
  for (int k = 0; k <= order; ++k) j.c[k] = t.cvar(k == 0 ? x : 0.0);
  return j;
}

}  // namespace spinn
