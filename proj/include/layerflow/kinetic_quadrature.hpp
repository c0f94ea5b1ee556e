#pragma once

// Quadrature of the disc Maxwellian, independent of the closed-form fluxes.
// Used as a reference by the test suites.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "kinetic_flux.hpp"

namespace layerflow::quadrature {

/// Composite Gauss-Legendre rule on [a, b]: `panels` panels of 20 points.
struct Rule {
  std::vector<double> x, w;
};

inline Rule composite(double a, double b, int panels) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const auto &ab = G::abscissa();
  const auto &wt = G::weights();
  Rule r;
  const double hp = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = a + (p + 0.5) * hp, s = 0.5 * hp;
    for (std::size_t k = 0; k < ab.size(); ++k) {
      r.x.push_back(c - s * ab[k]);
      r.w.push_back(s * wt[k]);
      r.x.push_back(c + s * ab[k]);
      r.w.push_back(s * wt[k]);
    }
  }
  return r;
}

/// Density of the single-layer equilibrium on its velocity disc.
inline double maxwellian_value(double g) { return 1.0 / (2.0 * g * std::numbers::pi); }

/// Integral of zeta * (1, xi, gamma) * M over the half disc zeta = (xi,gamma).n >= 0
/// (sign = +1) or <= 0 (sign = -1), for the single-layer equilibrium of depth h.
inline FluxTriple half_flux(double h, double u, double v, Vec2 n, double g, int sign = +1, int panels = 10) {
  if (h == 0.0) return {};
  const double c = std::sqrt(0.5 * g * h);
  const double R = 2.0 * c;
  const Vec2 t{-n.y, n.x};
  const double un = u * n.x + v * n.y;
  // local coordinates: xi = u + (y1 n + y2 t), region y1 >= -un (or <= for sign -1)
  const double s = std::clamp(-sign * un / R, -1.0, 1.0);
  const double th0 = std::asin(s);
  if (th0 >= std::numbers::pi / 2) return {};
  const Rule T = composite(th0, std::numbers::pi / 2, panels);
  const Rule S = composite(-1.0, 1.0, panels);
  const double M = maxwellian_value(g);
  FluxTriple out;
  for (std::size_t a = 0; a < T.x.size(); ++a) {
    const double cs = std::cos(T.x[a]);
    const double y1 = sign * R * std::sin(T.x[a]);
    const double jac = R * cs * R * cs;
    for (std::size_t b = 0; b < S.x.size(); ++b) {
      const double y2 = R * cs * S.x[b];
      const double xi = u + y1 * n.x + y2 * t.x;
      const double ga = v + y1 * n.y + y2 * t.y;
      const double zeta = xi * n.x + ga * n.y;
      const double wgt = T.w[a] * S.w[b] * jac * M * zeta;
      out.h += wgt;
      out.hu += wgt * xi;
      out.hv += wgt * ga;
    }
  }
  return out;
}

/// Moments of (1, xi, gamma, xi^2, xi gamma, gamma^2) against the equilibrium of a
/// layer of fraction l in a column of depth h.
inline std::array<double, 6> maxwellian_moments(double h, double u, double v, double g, double l = 1.0,
                                                int panels = 10) {
  std::array<double, 6> m{};
  if (h == 0.0) return m;
  const double R = std::sqrt(2.0 * g * h);
  const Rule r = composite(0.0, R, panels);
  const Rule p = composite(0.0, 2.0 * std::numbers::pi, panels);
  const double M = l * maxwellian_value(g);
  for (std::size_t a = 0; a < r.x.size(); ++a)
    for (std::size_t b = 0; b < p.x.size(); ++b) {
      const double xi = u + r.x[a] * std::cos(p.x[b]);
      const double ga = v + r.x[a] * std::sin(p.x[b]);
      const double w = r.w[a] * p.w[b] * r.x[a] * M;
      m[0] += w;
      m[1] += w * xi;
      m[2] += w * ga;
      m[3] += w * xi * xi;
      m[4] += w * xi * ga;
      m[5] += w * ga * ga;
    }
  return m;
}

/// Integral of (1, xi, gamma) * theta * M over the disc of an equilibrium of depth h
/// whose velocity is (u, v), with theta = ((xi, gamma) - (u0, v0)).n.
inline std::array<double, 3> theta_moments(double h, double u, double v, double u0, double v0, Vec2 n, double g,
                                           double l = 1.0, int panels = 10) {
  std::array<double, 3> m{};
  if (h == 0.0) return m;
  const double R = std::sqrt(2.0 * g * h);
  const Rule r = composite(0.0, R, panels);
  const Rule p = composite(0.0, 2.0 * std::numbers::pi, panels);
  const double M = l * maxwellian_value(g);
  for (std::size_t a = 0; a < r.x.size(); ++a)
    for (std::size_t b = 0; b < p.x.size(); ++b) {
      const double xi = u + r.x[a] * std::cos(p.x[b]);
      const double ga = v + r.x[a] * std::sin(p.x[b]);
      const double th = (xi - u0) * n.x + (ga - v0) * n.y;
      const double w = r.w[a] * p.w[b] * r.x[a] * M * th;
      m[0] += w;
      m[1] += w * xi;
      m[2] += w * ga;
    }
  return m;
}

}  // namespace layerflow::quadrature
