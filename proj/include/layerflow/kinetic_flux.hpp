#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace layerflow {

/// Numerical flux of one layer through a unit normal: mass, x- and y-momentum.
struct FluxTriple {
  double h = 0.0;
  double hu = 0.0;
  double hv = 0.0;

  FluxTriple &operator+=(const FluxTriple &o) {
    h += o.h;
    hu += o.hu;
    hv += o.hv;
    return *this;
  }
  FluxTriple &operator-=(const FluxTriple &o) {
    h -= o.h;
    hu -= o.hu;
    hv -= o.hv;
    return *this;
  }
  FluxTriple &operator*=(double s) {
    h *= s;
    hu *= s;
    hv *= s;
    return *this;
  }
  friend FluxTriple operator+(FluxTriple a, const FluxTriple &b) { return a += b; }
  friend FluxTriple operator-(FluxTriple a, const FluxTriple &b) { return a -= b; }
  friend FluxTriple operator*(FluxTriple a, double s) { return a *= s; }
  friend FluxTriple operator*(double s, FluxTriple a) { return a *= s; }
  friend FluxTriple operator-(const FluxTriple &a) { return {-a.h, -a.hu, -a.hv}; }
};

/// Marginal of the disc equilibrium along one velocity axis.
inline double chi_marginal(double w) {
  if (std::abs(w) >= 2.0) return 0.0;
  return std::sqrt(1.0 - 0.25 * w * w) / std::numbers::pi;
}

namespace detail {

inline void check_depth(double h) {
  if (!(h >= 0.0)) throw DomainError("negative water depth in kinetic flux");
}

/// Truncated moments of chi_marginal over [s, 2] for k = 0, 1, 2.
struct Moments {
  double j0, j1, j2;
};

inline Moments upper_moments(double s) {
  s = std::clamp(s, -2.0, 2.0);
  const double th = std::asin(0.5 * s);
  const double sn = std::sin(th), cs = std::cos(th);
  constexpr double pi = std::numbers::pi;
  return {(0.5 * pi - th - sn * cs) / pi, 4.0 / (3.0 * pi) * cs * cs * cs,
          (0.5 * pi - th + 0.25 * std::sin(4.0 * th)) / pi};
}

}  // namespace detail

/// Full physical flux (h un, h u un + g h^2/2 nx, h v un + g h^2/2 ny).
inline FluxTriple flux_total(double h, double u, double v, Vec2 n, double g) {
  detail::check_depth(h);
  const double un = u * n.x + v * n.y;
  const double p = 0.5 * g * h * h;
  return {h * un, h * u * un + p * n.x, h * v * un + p * n.y};
}

/// Outgoing kinetic half flux (velocities with xi.n >= 0).
inline FluxTriple half_flux_plus(double h, double u, double v, Vec2 n, double g) {
  detail::check_depth(h);
  if (h == 0.0) return {};
  const double c = std::sqrt(0.5 * g * h);
  const double un = u * n.x + v * n.y;
  if (un >= 2.0 * c) return flux_total(h, u, v, n, g);
  if (un <= -2.0 * c) return {};
  const auto J = detail::upper_moments(-un / c);
  const double c2 = c * c;
  return {h * (un * J.j0 + c * J.j1), h * (un * u * J.j0 + c * (un * n.x + u) * J.j1 + c2 * n.x * J.j2),
          h * (un * v * J.j0 + c * (un * n.y + v) * J.j1 + c2 * n.y * J.j2)};
}

/// Incoming kinetic half flux, completing the splitting of flux_total.
inline FluxTriple half_flux_minus(double h, double u, double v, Vec2 n, double g) {
  detail::check_depth(h);
  if (h == 0.0) return {};
  const double c = std::sqrt(0.5 * g * h);
  const double un = u * n.x + v * n.y;
  if (un >= 2.0 * c) return {};
  if (un <= -2.0 * c) return flux_total(h, u, v, n, g);
  return flux_total(h, u, v, n, g) - half_flux_plus(h, u, v, n, g);
}

/// Hydrostatically reconstructed interface depths.
struct HRPair {
  double zstar = 0.0;
  double h_ij = 0.0;
  double h_ji = 0.0;
};

inline HRPair hr_states(double h_i, double h_j, double zb_i, double zb_j) {
  const double zs = std::max(zb_i, zb_j);
  return {zs, std::max(h_i - (zs - zb_i), 0.0), std::max(h_j - (zs - zb_j), 0.0)};
}

/// One side of an interface: depth, bed elevation and per-layer velocities.
struct SideState {
  double h = 0.0;
  double zb = 0.0;
  const double *u = nullptr;
  const double *v = nullptr;
};

/// Per-layer HR flux across an interface with normal n (from side i to side j),
/// scaled by the layer fractions, plus the reconstructed depths.
inline HRPair edge_flux(const SideState &i, const SideState &j, Vec2 n, const std::vector<double> &l, double g,
                        FluxTriple *out) {
  const HRPair p = hr_states(i.h, j.h, i.zb, j.zb);
  for (std::size_t a = 0; a < l.size(); ++a)
    out[a] = l[a] * (half_flux_plus(p.h_ij, i.u[a], i.v[a], n, g) + half_flux_minus(p.h_ji, j.u[a], j.v[a], n, g));
  return p;
}

/// Per-layer HR source for the cell owning `side`. `h_cell`, `zb_cell` are the
/// cell averages; when the side state is the cell state this is the first-order
/// (g/2) l (h*^2 - h^2) n term, otherwise a centred bed-slope term is added so
/// that linear reconstructions keep the lake at rest.
inline Vec2 hr_source(double hstar, const SideState &side, double h_cell, double zb_cell, Vec2 n, double g) {
  const double s = 0.5 * g * (hstar * hstar - side.h * side.h) - 0.5 * g * (h_cell + side.h) * (side.zb - zb_cell);
  return n * s;
}

}  // namespace layerflow
