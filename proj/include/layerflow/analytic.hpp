#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "boundary.hpp"
#include "errors.hpp"
#include "layer_state.hpp"
#include "mesh.hpp"
#include "viscous.hpp"

namespace layerflow {

/// Closed-form reference solution. Velocities are functions of (t, x, y, z).
struct AnalyticCase {
  std::string name;
  double g = default_gravity;
  std::function<double(double, double)> zb;
  std::function<double(double, double, double)> h;
  std::function<double(double, double, double, double)> u, v, w;
  /// Optional rheology attached to the case (friction field, wind).
  RheologyParams rheology;

  /// Mean of u (or v) over [z0, z1] at (t, x, y).
  double layer_mean(const std::function<double(double, double, double, double)> &f, double t, double x, double y,
                    double z0, double z1) const {
    if (!(z1 > z0)) return f(t, x, y, z0);
    using G = boost::math::quadrature::gauss<double, 20>;
    return G::integrate([&](double z) { return f(t, x, y, z); }, z0, z1) / (z1 - z0);
  }
};

// ---------------------------------------------------------------------------

struct ChannelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double zbar = 0.0;
  double xmax = 20.0;
  double g = default_gravity;
};

inline double channel_h0(double x, double xmax) {
  const double a = x - 0.5 * xmax, b = x - 2.0 * xmax / 3.0;
  return 0.5 + 1.5 / (1.0 + a * a) - 0.5 / (2.0 + b * b);
}

inline double channel_h0_prime(double x, double xmax) {
  const double a = x - 0.5 * xmax, b = x - 2.0 * xmax / 3.0;
  return -3.0 * a / ((1.0 + a * a) * (1.0 + a * a)) + b / ((2.0 + b * b) * (2.0 + b * b));
}

/// Stationary flow over a bump with a vertically sheared velocity profile.
inline AnalyticCase stationary_channel(const ChannelParams &p = {}) {
  const double A = p.alpha, B = p.beta, g = p.g, xm = p.xmax, zbar = p.zbar;
  double prev = std::sin(B * channel_h0(0.0, xm));
  for (int k = 0; k <= 2000; ++k) {
    const double s = std::sin(B * channel_h0(xm * k / 2000.0, xm));
    if (std::abs(s) < 1e-12 || (s > 0.0) != (prev > 0.0))
      throw ConfigError("channel parameters make sin(beta h0) vanish");
    prev = s;
  }
  AnalyticCase c;
  c.name = "channel";
  c.g = g;
  c.zb = [=](double x, double) {
    const double s = std::sin(B * channel_h0(x, xm));
    return zbar - channel_h0(x, xm) - A * A * B * B / (2.0 * g * s * s);
  };
  c.h = [=](double, double x, double) { return channel_h0(x, xm); };
  auto zb = c.zb;
  c.u = [=](double, double x, double y, double z) {
    return A * B * std::cos(B * (z - zb(x, y))) / std::sin(B * channel_h0(x, xm));
  };
  c.v = [](double, double, double, double) { return 0.0; };
  c.w = [=](double, double x, double y, double z) {
    const double h0 = channel_h0(x, xm), dh = channel_h0_prime(x, xm);
    const double sh = std::sin(B * h0), ch = std::cos(B * h0);
    const double dzb = -dh + A * A * B * B * B * ch * dh / (g * sh * sh * sh);
    const double s = z - zb(x, y);
    return A * B * (dzb * std::cos(B * s) / sh + dh * std::sin(B * s) * ch / (sh * sh));
  };
  return c;
}

// ---------------------------------------------------------------------------

struct ThackerParams {
  double alpha = 2.0;
  double beta = 1.0;
  double gamma = 0.3;
  double c = -1.0;
  double g = default_gravity;

  double omega() const { return std::sqrt(4.0 * alpha * g); }
  double period() const { return 2.0 * std::numbers::pi / omega(); }
};

/// Oscillation in a paraboloid with a linearly sheared velocity.
inline AnalyticCase thacker_bowl(const ThackerParams &p = {}) {
  if (!(p.alpha > 0.0 && p.beta > 0.0 && p.gamma > 0.0 && p.gamma < 1.0))
    throw ConfigError("bowl parameters need alpha, beta > 0 and 0 < gamma < 1");
  if (!(p.c < 0.0)) throw ConfigError("bowl constant c must be negative");
  const double al = p.alpha, be = p.beta, ga = p.gamma, cc = p.c, g = p.g, om = p.omega();
  const double Bq = be * be * al * g * (ga * ga - 1.0);

  // h as a function of rho = r^2, written without the 0/0 at the centre
  struct HD {
    double h, dh;  // h and dh/drho
  };
  auto depth = [=](double t, double rho) -> HD {
    const double D = ga * std::cos(om * t) - 1.0;
    const double z = rho / D;
    const double X = cc * z + Bq * z * z;
    const double S2 = 4.0 * g * g + X;
    if (S2 <= 0.0) return {0.0, 0.0};
    const double S = std::sqrt(S2);
    const double num = cc + Bq * z, den = D * (S + 2.0 * g);
    const double h = 2.0 / (be * be) * num / den;
    if (h <= 0.0) return {0.0, 0.0};
    const double dS = (cc + 2.0 * Bq * z) / (2.0 * S);
    const double dhdz = 2.0 / (be * be * D) * (Bq * (S + 2.0 * g) - num * dS) / ((S + 2.0 * g) * (S + 2.0 * g));
    return {h, dhdz / D};
  };
  auto radial = [=](double t) { return om * ga * std::sin(om * t) / (2.0 * (1.0 - ga * std::cos(om * t))); };

  AnalyticCase c;
  c.name = "thacker";
  c.g = g;
  c.zb = [=](double x, double y) { return 0.5 * al * (x * x + y * y); };
  c.h = [=](double t, double x, double y) { return depth(t, x * x + y * y).h; };
  auto shear = [=](double t, double x, double y, double z) {
    const double rho = x * x + y * y;
    return be * (z - 0.5 * al * rho - 0.5 * depth(t, rho).h) + radial(t);
  };
  c.u = [=](double t, double x, double y, double z) { return x * shear(t, x, y, z); };
  c.v = [=](double t, double x, double y, double z) { return y * shear(t, x, y, z); };
  c.w = [=](double t, double x, double y, double z) {
    const double rho = x * x + y * y;
    const HD d = depth(t, rho);
    if (d.h <= 0.0) return 0.0;
    const double s = z - 0.5 * al * rho, A = radial(t);
    // Q = beta (s^2/2 - h s/2) + A s ; w = -(2 Q + x Q_x + y Q_y)
    const double Q = be * (0.5 * s * s - 0.5 * d.h * s) + A * s;
    // x Q_x + y Q_y = rho * dQ/drho * 2 with ds/drho = -alpha/2, dh/drho = d.dh
    const double dsr = -0.5 * al;
    const double dQ = be * (s * dsr - 0.5 * d.dh * s - 0.5 * d.h * dsr) + A * dsr;
    return -(2.0 * Q + 2.0 * rho * dQ);
  };
  return c;
}

// ---------------------------------------------------------------------------

struct DrainingParams {
  double alpha = 1.0;
  double beta = 2.5;
  double t0 = 0.0;
  double t1 = 0.5;
  double theta = 0.0;
  double L = 2.0;
  double nu = 0.0;
  double zb0 = 0.0;
  double g = default_gravity;
};

/// Uniformly draining layer with a linear vertical shear.
inline AnalyticCase draining_tank(const DrainingParams &p = {}) {
  if (!(p.t1 > 0.0)) throw ConfigError("draining tank needs t1 > 0");
  if (!(p.alpha * p.beta > p.L)) throw ConfigError("draining tank needs alpha * beta > L");
  const double al = p.alpha, be = p.beta, t0 = p.t0, t1 = p.t1, zb0 = p.zb0;
  const double c2 = std::cos(p.theta) * std::cos(p.theta), s2 = std::sin(p.theta) * std::sin(p.theta);
  auto f = [=](double t) { return 1.0 / (t - t0 + t1); };
  AnalyticCase c;
  c.name = "draining";
  c.g = p.g;
  c.zb = [=](double, double) { return zb0; };
  c.h = [=](double t, double, double) { return al * f(t); };
  c.u = [=](double t, double x, double y, double z) {
    return be * ((z - zb0) - 0.5 * al * f(t)) + f(t) * (x * c2 + y * s2);
  };
  c.v = c.u;
  c.w = [=](double t, double, double, double z) { return f(t) * (zb0 - z); };
  if (p.nu > 0.0) {
    const double nu = p.nu;
    c.rheology.nu = nu;
    c.rheology.W = nu * be / 2.0;
    c.rheology.ts = Vec2{1.0, 1.0} * (1.0 / std::numbers::sqrt2);
    c.rheology.kappa_field = [=](double h, Vec2 x) {
      return 2.0 * nu * al * be / (h * (al * be - 2.0 * (x.x * c2 + x.y * s2)));
    };
  }
  return c;
}

// ---------------------------------------------------------------------------

/// Sets h and the layer momenta of `s` from the case at time t. Layer velocities
/// are vertical means over each layer.
inline void initialize_from(State &s, const AnalyticCase &c, double t) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  s.t = t;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double x = m.nodes[i].x, y = m.nodes[i].y;
    const double h = std::max(c.h(t, x, y), 0.0);
    s.h[i] = h;
    double z0 = m.zb[i];
    for (int a = 0; a < N; ++a) {
      const double ha = s.layers.l[a] * h;
      const double z1 = z0 + ha;
      if (h > s.h_dry) {
        s.qx[i * N + a] = ha * c.layer_mean(c.u, t, x, y, z0, z1);
        s.qy[i * N + a] = ha * c.layer_mean(c.v, t, x, y, z0, z1);
      } else {
        s.qx[i * N + a] = s.qy[i * N + a] = 0.0;
      }
      z0 = z1;
    }
  }
}

/// Column data for the `analytic` boundary kind: layer means at the given fractions.
inline BoundaryData boundary_data(const AnalyticCase &c, const std::vector<double> &l, double t, Vec2 x) {
  BoundaryData d;
  d.h = std::max(c.h(t, x.x, x.y), 0.0);
  double z0 = c.zb(x.x, x.y);
  for (double la : l) {
    const double z1 = z0 + la * d.h;
    d.u.push_back(c.layer_mean(c.u, t, x.x, x.y, z0, z1));
    d.v.push_back(c.layer_mean(c.v, t, x.x, x.y, z0, z1));
    z0 = z1;
  }
  return d;
}

enum class Field { h, eta, u, v };

inline Field parse_field(const std::string &s) {
  if (s == "h") return Field::h;
  if (s == "eta") return Field::eta;
  if (s == "u") return Field::u;
  if (s == "v") return Field::v;
  throw ConfigError("unknown error field '" + s + "'");
}

/// Area-weighted discrete L2 error against the case at time t. Velocity fields
/// compare every layer with the reference at the simulated mid-layer elevation.
inline double l2_error(const State &s, const AnalyticCase &c, double t, Field field = Field::h) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  double sum = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    const double x = m.nodes[i].x, y = m.nodes[i].y;
    double e2 = 0.0;
    switch (field) {
      case Field::h: {
        const double d = s.h[i] - std::max(c.h(t, x, y), 0.0);
        e2 = d * d;
        break;
      }
      case Field::eta: {
        const double d = s.eta(i) - (std::max(c.h(t, x, y), 0.0) + m.zb[i]);
        e2 = d * d;
        break;
      }
      case Field::u:
      case Field::v: {
        const auto z = interfaces(s, i);
        for (int a = 0; a < N; ++a) {
          const double zm = 0.5 * (z[a] + z[a + 1]);
          const double sim = field == Field::u ? s.u(i, a) : s.v(i, a);
          const double ref = field == Field::u ? c.u(t, x, y, zm) : c.v(t, x, y, zm);
          e2 += s.layers.l[a] * (sim - ref) * (sim - ref);
        }
        break;
      }
    }
    sum += m.area[i] * e2;
  }
  return std::sqrt(sum);
}

/// Least-squares slope of log(error) against log(size).
inline double convergence_order(const std::vector<double> &errors, const std::vector<double> &sizes) {
  if (errors.size() != sizes.size()) throw DomainError("errors and sizes differ in length");
  if (sizes.size() < 3) throw DomainError("convergence order needs at least three points");
  bool inc = true, dec = true;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    inc = inc && sizes[k] > sizes[k - 1];
    dec = dec && sizes[k] < sizes[k - 1];
  }
  if (!inc && !dec) throw DomainError("mesh sizes must be strictly monotone");
  double mx = 0, my = 0;
  const double n = static_cast<double>(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (!(errors[k] > 0.0) || !(sizes[k] > 0.0)) throw DomainError("errors and sizes must be positive");
    mx += std::log(sizes[k]) / n;
    my += std::log(errors[k]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double dx = std::log(sizes[k]) - mx;
    sxy += dx * (std::log(errors[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Mean length of the triangulation edges.
inline double mean_edge_length(const Mesh &m) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto &e : m.edges) {
    s += norm(m.nodes[e.j] - m.nodes[e.i]);
    ++n;
  }
  return n ? s / n : 0.0;
}

}  // namespace layerflow
