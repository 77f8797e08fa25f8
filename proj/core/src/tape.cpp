#include "spinn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace spinn {

void Tape::reset() {
  vals_.clear();
  adj_.clear();
  ops_.clear();
  auxf_.clear();
  auxi_.clear();
  mask_pool_.clear();
  n_params_ = 0;
}

Range Tape::bind_params(std::span<const double> p) {
  require(vals_.empty(), "bind_params must be the first tape allocation");
  vals_.assign(p.begin(), p.end());
  n_params_ = static_cast<std::uint32_t>(p.size());
  return Range{0, n_params_};
}

void Tape::refresh_params(std::span<const double> p) {
  require(p.size() == n_params_, "parameter count changed between steps");
  std::copy(p.begin(), p.end(), vals_.begin());
}

Range Tape::alloc(std::uint32_t len) {
  Range r{static_cast<NodeId>(vals_.size()), len};
  vals_.resize(vals_.size() + len);
  return r;
}

NodeId Tape::constant(double v) {
  Range r = alloc(1);
  vals_[r.base] = v;
  return r.base;
}

Range Tape::constants(std::span<const double> v) {
  Range r = alloc(static_cast<std::uint32_t>(v.size()));
  std::copy(v.begin(), v.end(), vals_.begin() + r.base);
  return r;
}

Range Tape::reserve(std::uint32_t len) { return alloc(len); }

Range Tape::ewise(OpKind kind, Range a, Range b) {
  if (b.len != 0) require(a.len == b.len, "elementwise length mismatch");
  Range out = alloc(a.len);
  ops_.push_back(Op{kind, out, a, b, 0, 0});
  exec(ops_.back());
  return out;
}

Range Tape::ewise_c(OpKind kind, Range a, double c) {
  Range out = alloc(a.len);
  auto fidx = static_cast<std::uint32_t>(auxf_.size());
  auxf_.push_back(c);
  ops_.push_back(Op{kind, out, a, Range{}, fidx, 0});
  exec(ops_.back());
  return out;
}

Range Tape::ewise_into(OpKind kind, Range out, Range a, Range b) {
  require(out.len == a.len, "output block length mismatch");
  if (b.len != 0) require(a.len == b.len, "elementwise length mismatch");
  ops_.push_back(Op{kind, out, a, b, 0, 0});
  exec(ops_.back());
  return out;
}

Range Tape::ewise_c_into(OpKind kind, Range out, Range a, double c) {
  require(out.len == a.len, "output block length mismatch");
  auto fidx = static_cast<std::uint32_t>(auxf_.size());
  auxf_.push_back(c);
  ops_.push_back(Op{kind, out, a, Range{}, fidx, 0});
  exec(ops_.back());
  return out;
}

NodeId Tape::sum(Range a) {
  Range out = alloc(1);
  ops_.push_back(Op{OpKind::sum, out, a, Range{}, 0, 0});
  exec(ops_.back());
  return out.base;
}

NodeId Tape::mean_sq(Range a, double divisor) {
  require(divisor > 0.0, "mean_sq divisor must be positive");
  Range out = alloc(1);
  auto fidx = static_cast<std::uint32_t>(auxf_.size());
  auxf_.push_back(divisor);
  ops_.push_back(Op{OpKind::mean_sq, out, a, Range{}, fidx, 0});
  exec(ops_.back());
  return out.base;
}

NodeId Tape::mean_sq_masked(Range a, std::span<const std::uint8_t> mask,
                            double divisor) {
  require(mask.size() == a.len, "mask length mismatch");
  require(divisor > 0.0, "mean_sq divisor must be positive");
  Range out = alloc(1);
  auto fidx = static_cast<std::uint32_t>(auxf_.size());
  auxf_.push_back(divisor);
  auto midx = static_cast<std::uint32_t>(mask_pool_.size());
  mask_pool_.insert(mask_pool_.end(), mask.begin(), mask.end());
  ops_.push_back(Op{OpKind::mean_sq_masked, out, a, Range{}, fidx, midx});
  exec(ops_.back());
  return out.base;
}

void Tape::emit_jet_affine(const JetAffineArgs& args) {
  require(args.ncoef >= 1 && args.n_in >= 1 && args.n_out >= 1,
          "bad jet_affine dims");
  auto iidx = static_cast<std::uint32_t>(auxi_.size());
  auxi_.insert(auxi_.end(), {args.n_in, args.n_out, args.ncoef, args.w, args.b,
                             args.in, args.out, args.out_stride});
  Op op{OpKind::jet_affine,
        Range{args.out, args.n_out},
        Range{args.in, args.n_in * args.ncoef},
        Range{},
        0,
        iidx};
  ops_.push_back(op);
  exec(ops_.back());
}

Range Tape::emit_merge_sep(std::span<const MergeAxisArgs> axes,
                           std::uint32_t r) {
  require(axes.size() >= 2, "merge needs at least two axes");
  std::size_t cells = 1;
  for (const auto& ax : axes) cells *= ax.n;
  Range out = alloc(static_cast<std::uint32_t>(cells));
  auto iidx = static_cast<std::uint32_t>(auxi_.size());
  auxi_.push_back(static_cast<std::uint32_t>(axes.size()));
  auxi_.push_back(r);
  for (const auto& ax : axes)
    auxi_.insert(auxi_.end(), {ax.rows, ax.n, ax.row_stride});
  ops_.push_back(Op{OpKind::merge_sep, out, Range{}, Range{}, 0, iidx});
  exec(ops_.back());
  return out;
}

Range Tape::emit_merge_point(std::span<const MergeAxisArgs> axes,
                             std::uint32_t r, std::uint32_t n) {
  require(axes.size() >= 2, "merge needs at least two axes");
  for (const auto& ax : axes)
    require(ax.n == n, "merge_point axes must share the batch length");
  Range out = alloc(n);
  auto iidx = static_cast<std::uint32_t>(auxi_.size());
  auxi_.push_back(static_cast<std::uint32_t>(axes.size()));
  auxi_.push_back(r);
  auxi_.push_back(n);
  for (const auto& ax : axes)
    auxi_.insert(auxi_.end(), {ax.rows, ax.n, ax.row_stride});
  ops_.push_back(Op{OpKind::merge_point, out, Range{}, Range{}, 0, iidx});
  exec(ops_.back());
  return out;
}

namespace {

std::vector<detail::KAxis> merge_axes(const std::uint32_t* ai, int d,
                                      double* vals, double* adj) {
  std::vector<detail::KAxis> axes(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    std::uint32_t rows = ai[0], n = ai[1], stride = ai[2];
    ai += 3;
    axes[static_cast<std::size_t>(k)] =
        detail::KAxis{vals + rows, adj == nullptr ? nullptr : adj + rows, n,
                      stride};
  }
  return axes;
}

}  // namespace

void Tape::exec(const Op& op) {
  double* v = vals_.data();
  const double* a = v + op.a.base;
  const double* b = v + op.b.base;
  double* o = v + op.out.base;
  const std::size_t n = op.a.len;
  switch (op.kind) {
    case OpKind::add:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
      break;
    case OpKind::sub:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
      break;
    case OpKind::mul:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
      break;
    case OpKind::div:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] / b[i];
      break;
    case OpKind::neg:
      for (std::size_t i = 0; i < n; ++i) o[i] = -a[i];
      break;
    case OpKind::tanh_fn:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(a[i]);
      break;
    case OpKind::exp_fn:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::exp(a[i]);
      break;
    case OpKind::sin_fn:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::sin(a[i]);
      break;
    case OpKind::cos_fn:
      for (std::size_t i = 0; i < n; ++i) o[i] = std::cos(a[i]);
      break;
    case OpKind::square:
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] * a[i];
      break;
    case OpKind::scale: {
      double c = auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i) o[i] = c * a[i];
      break;
    }
    case OpKind::add_const: {
      double c = auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i) o[i] = a[i] + c;
      break;
    }
    case OpKind::rsub_const: {
      double c = auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i) o[i] = c - a[i];
      break;
    }
    case OpKind::sum: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += a[i];
      o[0] = acc;
      break;
    }
    case OpKind::mean_sq: {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
      o[0] = acc / auxf_[op.auxf];
      break;
    }
    case OpKind::mean_sq_masked: {
      const std::uint8_t* m = mask_pool_.data() + op.auxi;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (m[i]) acc += a[i] * a[i];
      o[0] = acc / auxf_[op.auxf];
      break;
    }
    case OpKind::jet_affine: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      const std::uint32_t n_in = ai[0], n_out = ai[1], ncoef = ai[2];
      const double* w = v + ai[3];
      const double* bias = v + ai[4];
      const double* in = v + ai[5];
      double* out = v + ai[6];
      const std::uint32_t out_stride = ai[7];
      for (std::uint32_t k = 0; k < ncoef; ++k) {
        const double* ink = in + static_cast<std::size_t>(k) * n_in;
        double* outk = out + static_cast<std::size_t>(k) * out_stride;
        for (std::uint32_t oo = 0; oo < n_out; ++oo) {
          const double* wrow = w + static_cast<std::size_t>(oo) * n_in;
          double acc = (k == 0) ? bias[oo] : 0.0;
          for (std::uint32_t i = 0; i < n_in; ++i) acc += wrow[i] * ink[i];
          outk[oo] = acc;
        }
      }
      break;
    }
    case OpKind::merge_sep: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      int d = static_cast<int>(ai[0]);
      int r = static_cast<int>(ai[1]);
      auto axes = merge_axes(ai + 2, d, v, nullptr);
      detail::merge_sep_forward(axes.data(), d, r, o, scratch_);
      break;
    }
    case OpKind::merge_point: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      int d = static_cast<int>(ai[0]);
      int r = static_cast<int>(ai[1]);
      std::size_t np = ai[2];
      auto axes = merge_axes(ai + 3, d, v, nullptr);
      detail::merge_point_forward(axes.data(), d, r, np, o, scratch_);
      break;
    }
  }
}

void Tape::exec_backward(const Op& op) {
  double* v = vals_.data();
  double* g = adj_.data();
  const double* a = v + op.a.base;
  const double* b = v + op.b.base;
  const double* o = v + op.out.base;
  double* ga = g + op.a.base;
  double* gb = g + op.b.base;
  const double* go = g + op.out.base;
  const std::size_t n = op.a.len;
  switch (op.kind) {
    case OpKind::add:
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += go[i];
        gb[i] += go[i];
      }
      break;
    case OpKind::sub:
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += go[i];
        gb[i] -= go[i];
      }
      break;
    case OpKind::mul:
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += go[i] * b[i];
        gb[i] += go[i] * a[i];
      }
      break;
    case OpKind::div:
      for (std::size_t i = 0; i < n; ++i) {
        ga[i] += go[i] / b[i];
        gb[i] -= go[i] * o[i] / b[i];
      }
      break;
    case OpKind::neg:
      for (std::size_t i = 0; i < n; ++i) ga[i] -= go[i];
      break;
    case OpKind::tanh_fn:
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * (1.0 - o[i] * o[i]);
      break;
    case OpKind::exp_fn:
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * o[i];
      break;
    case OpKind::sin_fn:
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * std::cos(a[i]);
      break;
    case OpKind::cos_fn:
      for (std::size_t i = 0; i < n; ++i) ga[i] -= go[i] * std::sin(a[i]);
      break;
    case OpKind::square:
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * 2.0 * a[i];
      break;
    case OpKind::scale: {
      double c = auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i] * c;
      break;
    }
    case OpKind::add_const:
      for (std::size_t i = 0; i < n; ++i) ga[i] += go[i];
      break;
    case OpKind::rsub_const:
      for (std::size_t i = 0; i < n; ++i) ga[i] -= go[i];
      break;
    case OpKind::sum: {
      double gg = go[0];
      for (std::size_t i = 0; i < n; ++i) ga[i] += gg;
      break;
    }
    case OpKind::mean_sq: {
      double gg = 2.0 * go[0] / auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i) ga[i] += gg * a[i];
      break;
    }
    case OpKind::mean_sq_masked: {
      const std::uint8_t* m = mask_pool_.data() + op.auxi;
      double gg = 2.0 * go[0] / auxf_[op.auxf];
      for (std::size_t i = 0; i < n; ++i)
        if (m[i]) ga[i] += gg * a[i];
      break;
    }
    case OpKind::jet_affine: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      const std::uint32_t n_in = ai[0], n_out = ai[1], ncoef = ai[2];
      const double* w = v + ai[3];
      double* gw = g + ai[3];
      double* gbias = g + ai[4];
      const double* in = v + ai[5];
      double* gin = g + ai[5];
      const std::uint32_t out_stride = ai[7];
      const double* gout = g + ai[6];
      for (std::uint32_t k = 0; k < ncoef; ++k) {
        const double* ink = in + static_cast<std::size_t>(k) * n_in;
        double* gink = gin + static_cast<std::size_t>(k) * n_in;
        const double* goutk = gout + static_cast<std::size_t>(k) * out_stride;
        for (std::uint32_t oo = 0; oo < n_out; ++oo) {
          double gg = goutk[oo];
          if (gg == 0.0) continue;
          const double* wrow = w + static_cast<std::size_t>(oo) * n_in;
          double* gwrow = gw + static_cast<std::size_t>(oo) * n_in;
          if (k == 0) gbias[oo] += gg;
          for (std::uint32_t i = 0; i < n_in; ++i) {
            gwrow[i] += gg * ink[i];
            gink[i] += gg * wrow[i];
          }
        }
      }
      break;
    }
    case OpKind::merge_sep: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      int d = static_cast<int>(ai[0]);
      int r = static_cast<int>(ai[1]);
      auto axes = merge_axes(ai + 2, d, v, g);
      detail::merge_sep_backward(axes.data(), d, r, go, scratch_);
      break;
    }
    case OpKind::merge_point: {
      const std::uint32_t* ai = auxi_.data() + op.auxi;
      int d = static_cast<int>(ai[0]);
      int r = static_cast<int>(ai[1]);
      std::size_t np = ai[2];
      auto axes = merge_axes(ai + 3, d, v, g);
      detail::merge_point_backward(axes.data(), d, r, np, go, scratch_);
      break;
    }
  }
}

void Tape::forward_all() {
  for (const Op& op : ops_) exec(op);
}

void Tape::backward(NodeId out) {
  require(out < vals_.size(), "backward target out of range");
  adj_.assign(vals_.size(), 0.0);
  adj_[out] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) exec_backward(*it);
}

bool Tape::all_finite(Range r) const {
  for (std::uint32_t i = 0; i < r.len; ++i)
    if (!std::isfinite(vals_[r.base + i])) return false;
  return true;
}

}  // namespace spinn
