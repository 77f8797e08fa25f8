#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spinn/pde.hpp"
#include "spinn/tape.hpp"

// Residual operators expressed once over a grid backend, so the same
// composition runs on plain injected grids (oracle tests) and on tape node
// ranges (training).

namespace spinn::pde {

struct PlainBackend {
  using G = std::vector<double>;

  static void chk(const G& a, const G& b) {
    require(a.size() == b.size(), "residual grid shape mismatch");
  }
  G add(const G& a, const G& b) {
    chk(a, b);
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] + b[i];
    return o;
  }
  G sub(const G& a, const G& b) {
    chk(a, b);
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] - b[i];
    return o;
  }
  G mul(const G& a, const G& b) {
    chk(a, b);
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] * b[i];
    return o;
  }
  G square(const G& a) {
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] * a[i];
    return o;
  }
  G scale(const G& a, double c) {
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = c * a[i];
    return o;
  }
  G add_const(const G& a, double c) {
    G o(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] + c;
    return o;
  }
  G neg(const G& a) { return scale(a, -1.0); }
  G lift(const std::vector<double>& v) { return v; }
};

struct TapeBackend {
  Tape* t = nullptr;
  using G = Range;

  G add(G a, G b) { return t->add(a, b); }
  G sub(G a, G b) { return t->sub(a, b); }
  G mul(G a, G b) { return t->mul(a, b); }
  G square(G a) { return t->square(a); }
  G scale(G a, double c) { return t->scale(a, c); }
  G add_const(G a, double c) { return t->add_const(a, c); }
  G neg(G a) { return t->neg(a); }
  G lift(const std::vector<double>& v) { return t->constants(v); }
};

namespace detail_res {

inline std::vector<int> mi(std::initializer_list<int> v) { return {v}; }

}  // namespace detail_res

// term(component, alpha) yields the derivative grid d^|alpha| u_c / dx^alpha;
// fields are the problem's coordinate-only grids already lifted into the
// backend. Returns one grid per residual component.
template <class B>
std::vector<typename B::G> build_residual(
    B& b, const PdeProblem& p,
    const std::function<typename B::G(int, std::span<const int>)>& term,
    std::span<const typename B::G> fields) {
  using G = typename B::G;
  const int d = p.dim();
  auto T = [&](int c, std::vector<int> a) { return term(c, a); };
  auto unit = [&](int axis, int order) {
    std::vector<int> a(static_cast<std::size_t>(d), 0);
    a[static_cast<std::size_t>(axis)] = order;
    return a;
  };
  auto zero = [&] { return std::vector<int>(static_cast<std::size_t>(d), 0); };

  switch (p.id) {
    case ProblemId::helmholtz3d: {
      // laplacian(u) + k^2 u - q, k = 1
      G lap = b.add(b.add(T(0, unit(0, 2)), T(0, unit(1, 2))),
                    T(0, unit(2, 2)));
      G r = b.add(lap, T(0, zero()));  // k^2 = 1
      return {b.sub(r, fields[0])};
    }
    case ProblemId::kg3d:
    case ProblemId::kg4d: {
      // u_tt - laplacian_x(u) + u^2 - f
      G lap = T(0, unit(1, 2));
      for (int s = 2; s < d; ++s) lap = b.add(lap, T(0, unit(s, 2)));
      G r = b.sub(T(0, unit(0, 2)), lap);
      r = b.add(r, b.square(T(0, zero())));
      return {b.sub(r, fields[0])};
    }
    case ProblemId::diffusion_nl3d: {
      // u_t - alpha*(|grad u|^2 + u*laplacian(u)), alpha = 0.05
      G gsq = b.add(b.square(T(0, unit(1, 1))), b.square(T(0, unit(2, 1))));
      G lap = b.add(T(0, unit(1, 2)), T(0, unit(2, 2)));
      G rhs = b.add(gsq, b.mul(T(0, zero()), lap));
      return {b.sub(T(0, unit(0, 1)), b.scale(rhs, 0.05))};
    }
    case ProblemId::diffusion6d: {
      G lap = T(0, unit(1, 2));
      for (int s = 2; s < d; ++s) lap = b.add(lap, T(0, unit(s, 2)));
      return {b.sub(T(0, unit(0, 1)), lap)};
    }
    case ProblemId::flow_mixing: {
      // u_t + a u_x + b u_y with coefficient fields a(x,y), b(x,y)
      G r = T(0, unit(0, 1));
      r = b.add(r, b.mul(fields[0], T(0, unit(1, 1))));
      r = b.add(r, b.mul(fields[1], T(0, unit(2, 1))));
      return {r};
    }
    case ProblemId::poisson_lshape: {
      // -laplacian(u) - 1 (mask applied by the loss)
      G lap = b.add(T(0, unit(0, 2)), T(0, unit(1, 2)));
      return {b.add_const(b.neg(lap), -1.0)};
    }
    case ProblemId::ns4d: {
      // Vorticity transport for omega = curl(u) plus the divergence
      // constraint; axes (t,x,y,z), nu = 0.05.
      const double nu = 0.05;
      auto sp = [&](int s) { return 1 + s; };  // spatial axis of component s
      auto mix = [&](std::initializer_list<std::pair<int, int>> terms) {
        // multi-index from {axis, order} pairs
        std::vector<int> a(static_cast<std::size_t>(d), 0);
        for (auto [ax, o] : terms) a[static_cast<std::size_t>(ax)] += o;
        return a;
      };
      auto omega = [&](int i) {
        int j = (i + 1) % 3, k = (i + 2) % 3;
        return b.sub(T(k, unit(sp(j), 1)), T(j, unit(sp(k), 1)));
      };
      std::vector<G> res;
      for (int i = 0; i < 3; ++i) {
        int j = (i + 1) % 3, k = (i + 2) % 3;
        // d/dt omega_i
        G r = b.sub(T(k, mix({{0, 1}, {sp(j), 1}})),
                    T(j, mix({{0, 1}, {sp(k), 1}})));
        // + (u . grad) omega_i
        for (int s = 0; s < 3; ++s) {
          G dom = b.sub(T(k, mix({{sp(s), 1}, {sp(j), 1}})),
                        T(j, mix({{sp(s), 1}, {sp(k), 1}})));
          r = b.add(r, b.mul(T(s, zero()), dom));
        }
        // - (omega . grad) u_i
        for (int s = 0; s < 3; ++s)
          r = b.sub(r, b.mul(omega(s), T(i, unit(sp(s), 1))));
        // - nu * laplacian(omega_i)
        for (int s = 0; s < 3; ++s) {
          G lom = b.sub(T(k, mix({{sp(s), 2}, {sp(j), 1}})),
                        T(j, mix({{sp(s), 2}, {sp(k), 1}})));
          r = b.sub(r, b.scale(lom, nu));
        }
        res.push_back(b.sub(r, fields[static_cast<std::size_t>(i)]));
      }
      // divergence of u
      G div = T(0, unit(sp(0), 1));
      div = b.add(div, T(1, unit(sp(1), 1)));
      div = b.add(div, T(2, unit(sp(2), 1)));
      res.push_back(div);
      return res;
    }
  }
  throw ConfigError("unknown problem id");
}

}  // namespace spinn::pde
