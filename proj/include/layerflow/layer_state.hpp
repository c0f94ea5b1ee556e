#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mesh.hpp"

namespace layerflow {

inline constexpr double default_gravity = 9.81;
inline constexpr double default_h_dry = 1e-8;

/// Fixed layer fractions l_1..l_N (bottom to top).
struct LayerConfig {
  std::vector<double> l{1.0};

  static LayerConfig uniform(int n) {
    if (n < 1) throw ConfigError("layer count must be at least 1");
    return LayerConfig{std::vector<double>(n, 1.0 / n)};
  }

  int size() const { return static_cast<int>(l.size()); }

  void check() const {
    if (l.empty()) throw ConfigError("layer count must be at least 1");
    double s = 0.0;
    for (double x : l) {
      if (!(x > 0.0)) throw ConfigError("layer fractions must be positive");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-14 * l.size()) throw ConfigError("layer fractions must sum to 1");
  }
};

/// Conservative unknowns on the dual cells. Momenta are stored cell-major:
/// qx[i * N + a] for layer a of cell i.
struct State {
  const Mesh *mesh = nullptr;
  LayerConfig layers;
  double g = default_gravity;
  double h_dry = default_h_dry;
  double t = 0.0;
  std::vector<double> h;
  std::vector<double> qx;
  std::vector<double> qy;

  State() = default;
  State(const Mesh &m, LayerConfig lc, double gravity = default_gravity)
      : mesh(&m), layers(std::move(lc)), g(gravity) {
    layers.check();
    h.assign(m.num_cells(), 0.0);
    qx.assign(m.num_cells() * layers.size(), 0.0);
    qy.assign(m.num_cells() * layers.size(), 0.0);
  }

  int N() const { return layers.size(); }
  std::size_t cells() const { return h.size(); }
  double eta(std::size_t i) const { return h[i] + mesh->zb[i]; }

  double u(std::size_t i, int a) const {
    const double ha = layers.l[a] * h[i];
    return ha > layers.l[a] * h_dry ? qx[i * N() + a] / ha : 0.0;
  }
  double v(std::size_t i, int a) const {
    const double ha = layers.l[a] * h[i];
    return ha > layers.l[a] * h_dry ? qy[i * N() + a] / ha : 0.0;
  }
};

inline std::vector<double> layer_heights(const State &s, std::size_t i) {
  std::vector<double> out(s.N());
  for (int a = 0; a < s.N(); ++a) out[a] = s.layers.l[a] * s.h[i];
  return out;
}

inline std::pair<std::vector<double>, std::vector<double>> velocities(const State &s, std::size_t i) {
  std::vector<double> u(s.N()), v(s.N());
  for (int a = 0; a < s.N(); ++a) {
    u[a] = s.u(i, a);
    v[a] = s.v(i, a);
  }
  return {u, v};
}

/// Interface elevations z_{1/2}..z_{N+1/2} of cell i.
inline std::vector<double> interfaces(const State &s, std::size_t i) {
  std::vector<double> z(s.N() + 1);
  z[0] = s.mesh->zb[i];
  for (int a = 0; a < s.N(); ++a) z[a + 1] = z[a] + s.layers.l[a] * s.h[i];
  z[s.N()] = s.mesh->zb[i] + s.h[i];
  return z;
}

/// Vertical velocity at mid-layer from the divergence recursion. Result is
/// cell-major like the momenta; dry cells report 0.
inline std::vector<double> vertical_velocity(const State &s) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  const std::size_t nc = s.cells();
  std::vector<double> u(nc * N), v(nc * N), z(nc * (N + 1));
  for (std::size_t i = 0; i < nc; ++i) {
    for (int a = 0; a < N; ++a) {
      u[i * N + a] = s.u(i, a);
      v[i * N + a] = s.v(i, a);
    }
    const auto zi = interfaces(s, i);
    for (int a = 0; a <= N; ++a) z[i * (N + 1) + a] = zi[a];
  }
  auto div = [&](std::size_t i, auto &&fx, auto &&fy) {
    return dual_gradient(m, i, fx).x + dual_gradient(m, i, fy).y;
  };

  std::vector<double> w(nc * N, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    if (s.h[i] <= s.h_dry) continue;
    double k = div(
        i, [&](int j) { return z[j * (N + 1)] * u[j * N]; },
        [&](int j) { return z[j * (N + 1)] * v[j * N]; });
    for (int a = 0; a < N; ++a) {
      if (a > 0)
        k += div(
            i, [&](int j) { return z[j * (N + 1) + a] * (u[j * N + a] - u[j * N + a - 1]); },
            [&](int j) { return z[j * (N + 1) + a] * (v[j * N + a] - v[j * N + a - 1]); });
      const double zmid = 0.5 * (z[i * (N + 1) + a] + z[i * (N + 1) + a + 1]);
      const double du = div(
          i, [&](int j) { return u[j * N + a]; }, [&](int j) { return v[j * N + a]; });
      w[i * N + a] = k - zmid * du;
    }
  }
  return w;
}

struct Energy {
  /// Cell-major per-layer energy density E_a.
  std::vector<double> density;
  double total = 0.0;
};

inline Energy energy(const State &s) {
  Energy e;
  const int N = s.N();
  e.density.assign(s.cells() * N, 0.0);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    double cell = 0.0;
    for (int a = 0; a < N; ++a) {
      const double ha = s.layers.l[a] * s.h[i];
      const double uu = s.u(i, a), vv = s.v(i, a);
      const double E = 0.5 * ha * (uu * uu + vv * vv) + 0.5 * s.g * ha * s.h[i] + s.g * ha * s.mesh->zb[i];
      e.density[i * N + a] = E;
      cell += E;
    }
    e.total += s.mesh->area[i] * cell;
  }
  return e;
}

inline double total_mass(const State &s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) m += s.mesh->area[i] * s.h[i];
  return m;
}

}  // namespace layerflow
