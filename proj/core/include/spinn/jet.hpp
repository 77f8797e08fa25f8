#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "spinn/errors.hpp"

namespace spinn {

inline constexpr int kMaxJetOrder = 3;

// Truncated Taylor jet of one scalar quantity with respect to a single
// seeded input axis. coeffs[k] holds the k-th derivative itself (derivative
// convention), not the Taylor coefficient f^(k)/k!.
//
// The scalar type S is either plain double or a tape-recorded scalar, so the
// same propagation rules serve both pure evaluation and reverse-over-forward
// training.
template <class S>
struct Jet {
  std::array<S, kMaxJetOrder + 1> c{};
  int order = 0;

  Jet() = default;
  explicit Jet(int p) : order(p) { check_order(p); }

  static void check_order(int p) {
    require(p >= 0 && p <= kMaxJetOrder, "jet order must be in {0,1,2,3}");
  }

  const S& value() const { return c[0]; }
};

/// Seed an input variable: coeffs = (x, 1, 0, ...).
inline Jet<double> jet_seed(double x, int order) {
  Jet<double> j(order);
  j.c[0] = x;
  if (order >= 1) j.c[1] = 1.0;
  return j;
}

/// Lift a constant: all derivatives zero.
inline Jet<double> jet_const(double x, int order) {
  Jet<double> j(order);
  j.c[0] = x;
  return j;
}

namespace detail {
inline void check_same_order(int a, int b) {
  require(a == b, "jet order mismatch");
}
inline double value_of(double x) { return x; }
}  // namespace detail

template <class S>
Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) {
  detail::check_same_order(a.order, b.order);
  Jet<S> out(a.order);
  for (int k = 0; k <= a.order; ++k) out.c[k] = a.c[k] + b.c[k];
  return out;
}

template <class S>
Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) {
  detail::check_same_order(a.order, b.order);
  Jet<S> out(a.order);
  for (int k = 0; k <= a.order; ++k) out.c[k] = a.c[k] - b.c[k];
  return out;
}

template <class S>
Jet<S> operator-(const Jet<S>& a) {
  Jet<S> out(a.order);
  for (int k = 0; k <= a.order; ++k) out.c[k] = -a.c[k];
  return out;
}

// Leibniz rule in derivative convention: (ab)'' = a''b + 2a'b' + ab''.
template <class S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  detail::check_same_order(a.order, b.order);
  Jet<S> out(a.order);
  out.c[0] = a.c[0] * b.c[0];
  if (a.order >= 1) out.c[1] = a.c[1] * b.c[0] + a.c[0] * b.c[1];
  if (a.order >= 2)
    out.c[2] = a.c[2] * b.c[0] + (a.c[1] * b.c[1]) * 2.0 + a.c[0] * b.c[2];
  if (a.order >= 3)
    out.c[3] = a.c[3] * b.c[0] + (a.c[2] * b.c[1]) * 3.0 +
               (a.c[1] * b.c[2]) * 3.0 + a.c[0] * b.c[3];
  return out;
}

// Solves a = c*b coefficient by coefficient.
template <class S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  detail::check_same_order(a.order, b.order);
  require(detail::value_of(b.c[0]) != 0.0, "jet division by zero primal");
  Jet<S> out(a.order);
  out.c[0] = a.c[0] / b.c[0];
  if (a.order >= 1) out.c[1] = (a.c[1] - out.c[0] * b.c[1]) / b.c[0];
  if (a.order >= 2)
    out.c[2] =
        (a.c[2] - (out.c[1] * b.c[1]) * 2.0 - out.c[0] * b.c[2]) / b.c[0];
  if (a.order >= 3)
    out.c[3] = (a.c[3] - (out.c[2] * b.c[1]) * 3.0 - (out.c[1] * b.c[2]) * 3.0 -
                out.c[0] * b.c[3]) /
               b.c[0];
  return out;
}

template <class S>
Jet<S> operator*(const Jet<S>& a, double s) {
  Jet<S> out(a.order);
  for (int k = 0; k <= a.order; ++k) out.c[k] = a.c[k] * s;
  return out;
}

template <class S>
Jet<S> operator*(double s, const Jet<S>& a) {
  return a * s;
}

template <class S>
Jet<S> operator+(const Jet<S>& a, double s) {
  Jet<S> out = a;
  out.c[0] = a.c[0] + s;
  return out;
}

template <class S>
Jet<S> operator-(double s, const Jet<S>& a) {
  Jet<S> out(a.order);
  out.c[0] = s - a.c[0];
  for (int k = 1; k <= a.order; ++k) out.c[k] = -a.c[k];
  return out;
}

// Composition through order 3 (Faa di Bruno in derivative convention).
// fk[k] = k-th derivative of the outer function at the inner primal.
template <class S>
Jet<S> jet_compose(const Jet<S>& a, const std::array<S, 4>& fk) {
  Jet<S> out(a.order);
  out.c[0] = fk[0];
  if (a.order >= 1) out.c[1] = fk[1] * a.c[1];
  if (a.order >= 2) out.c[2] = fk[1] * a.c[2] + fk[2] * (a.c[1] * a.c[1]);
  if (a.order >= 3)
    out.c[3] = fk[1] * a.c[3] + (fk[2] * (a.c[1] * a.c[2])) * 3.0 +
               fk[3] * (a.c[1] * a.c[1] * a.c[1]);
  return out;
}

template <class S>
Jet<S> tanh(const Jet<S>& a) {
  using std::tanh;
  S t = tanh(a.c[0]);
  S s = 1.0 - t * t;  // sech^2
  return jet_compose(a, {t, s, (t * s) * -2.0, s * (t * t * 6.0 - 2.0)});
}

template <class S>
Jet<S> exp(const Jet<S>& a) {
  using std::exp;
  S e = exp(a.c[0]);
  return jet_compose(a, {e, e, e, e});
}

template <class S>
Jet<S> sin(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  S s = sin(a.c[0]);
  S c = cos(a.c[0]);
  return jet_compose(a, {s, c, -s, -c});
}

template <class S>
Jet<S> cos(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  S s = sin(a.c[0]);
  S c = cos(a.c[0]);
  return jet_compose(a, {c, -s, -c, s});
}

// sech = 2 / (e^x + e^-x); derivative chain expressed through tanh.
template <class S>
Jet<S> sech(const Jet<S>& a) {
  using std::exp;
  using std::tanh;
  S s = 2.0 / (exp(a.c[0]) + exp(-a.c[0]));
  S t = tanh(a.c[0]);
  return jet_compose(
      a, {s, -(s * t), s * (t * t - s * s), (s * t) * (s * s * 5.0 - t * t)});
}

template <class S>
Jet<S> square(const Jet<S>& a) {
  return a * a;
}

enum class JetOp { add, sub, mul, div };
enum class JetFn { tanh, exp, sin, cos, sech, square, neg };

template <class S>
Jet<S> jet_arith(const Jet<S>& a, const Jet<S>& b, JetOp op) {
  switch (op) {
    case JetOp::add: return a + b;
    case JetOp::sub: return a - b;
    case JetOp::mul: return a * b;
    case JetOp::div: return a / b;
  }
  throw ConfigError("unknown jet op");
}

template <class S>
Jet<S> jet_unary(const Jet<S>& a, JetFn fn) {
  switch (fn) {
    case JetFn::tanh: return tanh(a);
    case JetFn::exp: return exp(a);
    case JetFn::sin: return sin(a);
    case JetFn::cos: return cos(a);
    case JetFn::sech: return sech(a);
    case JetFn::square: return square(a);
    case JetFn::neg: return -a;
  }
  throw ConfigError("unknown jet fn");
}

inline bool jet_finite(const Jet<double>& a) {
  for (int k = 0; k <= a.order; ++k)
    if (!std::isfinite(a.c[k])) return false;
  return true;
}

}  // namespace spinn
