#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "layer_state.hpp"
#include "mesh.hpp"

namespace layerflow {

/// Simplified rheology: viscosity nu, bottom friction kappa (layer 1) and wind
/// stress W along t_s (layer N). `kappa_field`, when set, replaces kappa by a
/// function of the depth and position.
struct RheologyParams {
  double nu = 0.0;
  double kappa = 0.0;
  double W = 0.0;
  Vec2 ts{1.0, 0.0};
  std::function<double(double h, Vec2 x)> kappa_field;

  bool inert() const { return nu == 0.0 && kappa == 0.0 && W == 0.0 && !kappa_field; }

  void check() const {
    if (!(nu >= 0.0)) throw ConfigError("viscosity must be nonnegative");
    if (!(kappa >= 0.0)) throw ConfigError("friction coefficient must be nonnegative");
    if (W != 0.0 && std::abs(norm(ts) - 1.0) > 1e-12) throw ConfigError("wind direction must be a unit vector");
  }
};

/// Time step exceeding the explicit viscous stability limit.
class ViscousStepError : public std::runtime_error {
 public:
  ViscousStepError(double dt, double bound)
      : std::runtime_error("time step " + std::to_string(dt) + " exceeds the explicit viscous bound " +
                           std::to_string(bound)),
        bound_(bound) {}
  double admissible() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Vertical coupling coefficient across interface a+1/2.
inline double gamma_coeff(double nu, Vec2 grad_z, double ha, double hb) {
  const double s = ha + hb;
  if (!(s > 0.0)) return 0.0;
  return 2.0 * nu * (1.0 + dot(grad_z, grad_z)) / s;
}

namespace detail {

/// Layer-coupling stress coefficients of one triangle: c[a][b] multiplies grad u_b
/// in the flux of layer a. Only the tridiagonal band is nonzero.
inline void stress_coefficients(const std::vector<double> &hl, double nu, std::vector<double> &diag,
                                std::vector<double> &off) {
  const std::size_t N = hl.size();
  diag.assign(N, 0.0);
  off.assign(N, 0.0);  // off[a] couples a and a+1
  for (std::size_t a = 0; a + 1 < N; ++a) {
    const double s = hl[a] + hl[a + 1];
    if (!(s > 0.0)) continue;
    const double k = 0.5 * nu / s;
    diag[a] += k * hl[a] * hl[a];
    diag[a + 1] += k * hl[a + 1] * hl[a + 1];
    off[a] = k * hl[a] * hl[a + 1];
  }
}

struct ViscousWork {
  std::vector<double> u, v;         // nodal layer velocities
  std::vector<double> gam;          // nodal Gamma at interior interfaces, cell-major (N-1)
  std::vector<double> stiff_rate;   // Gershgorin rate of the horizontal stress
};

inline ViscousWork prepare(const State &s, const RheologyParams &p) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  const std::size_t nc = s.cells();
  ViscousWork w;
  w.u.assign(nc * N, 0.0);
  w.v.assign(nc * N, 0.0);
  for (std::size_t i = 0; i < nc; ++i)
    for (int a = 0; a < N; ++a) {
      w.u[i * N + a] = s.u(i, a);
      w.v[i * N + a] = s.v(i, a);
    }
  w.gam.assign(nc * std::max(N - 1, 0), 0.0);
  w.stiff_rate.assign(nc * N, 0.0);
  if (p.nu == 0.0) return w;

  std::vector<double> hl(N), dg, of;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto &tv = m.triangles[t];
    const double hmin = std::min({s.h[tv[0]], s.h[tv[1]], s.h[tv[2]]});
    const double area = m.tri_area[t];
    if (N > 1) {
      // interface gradients and lumped coupling
      for (int a = 0; a + 1 < N; ++a) {
        Vec2 gz{};
        for (int k = 0; k < 3; ++k) {
          const int j = tv[k];
          double z = m.zb[j];
          for (int b = 0; b <= a; ++b) z += s.layers.l[b] * s.h[j];
          gz += m.tri_grad[t][k] * z;
        }
        for (int k = 0; k < 3; ++k) {
          const int j = tv[k];
          if (s.h[j] <= s.h_dry) continue;
          const double g = gamma_coeff(p.nu, gz, s.layers.l[a] * s.h[j], s.layers.l[a + 1] * s.h[j]);
          w.gam[j * (N - 1) + a] += g * area / 3.0 / m.area[j];
        }
      }
    }
    if (hmin <= s.h_dry) continue;
    for (int a = 0; a < N; ++a) hl[a] = s.layers.l[a] * hmin;
    stress_coefficients(hl, p.nu, dg, of);
    for (int k = 0; k < 3; ++k) {
      const int j = tv[k];
      double gsum = 0.0;
      for (int q = 0; q < 3; ++q) gsum += std::abs(dot(m.tri_grad[t][k], m.tri_grad[t][q]));
      for (int a = 0; a < N; ++a) {
        double c = dg[a];
        if (a > 0) c += of[a - 1];
        if (a + 1 < N) c += of[a];
        w.stiff_rate[j * N + a] += area * c * gsum;
      }
    }
  }
  return w;
}

inline double friction(const State &s, const RheologyParams &p, std::size_t i) {
  return p.kappa_field ? p.kappa_field(s.h[i], s.mesh->nodes[i]) : p.kappa;
}

}  // namespace detail

/// Largest explicit time step for the viscous and friction update (Gershgorin
/// bound of the velocity operator). Infinite when the rheology is inert.
inline double viscous_dt_bound(const State &s, const RheologyParams &p) {
  if (p.nu == 0.0 && p.kappa == 0.0 && !p.kappa_field) return std::numeric_limits<double>::infinity();
  const auto w = detail::prepare(s, p);
  const int N = s.N();
  double rmax = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    if (s.h[i] <= s.h_dry) continue;
    for (int a = 0; a < N; ++a) {
      const double ha = s.layers.l[a] * s.h[i];
      double r = w.stiff_rate[i * N + a] / (s.mesh->area[i] * ha);
      if (a + 1 < N) r += 2.0 * w.gam[i * (N - 1) + a] / ha;
      if (a > 0) r += 2.0 * w.gam[i * (N - 1) + a - 1] / ha;
      if (a == 0) r += detail::friction(s, p, i) / ha;
      rmax = std::max(rmax, r);
    }
  }
  return rmax > 0.0 ? 1.0 / rmax : std::numeric_limits<double>::infinity();
}

/// Momentum increments dt * S_{v,f} of the explicit viscous, friction and wind
/// update, cell-major like the momenta.
inline void assemble_viscous_update(const State &s, const RheologyParams &p, double dt, std::vector<double> &dqx,
                                    std::vector<double> &dqy) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  const std::size_t nc = s.cells();
  dqx.assign(nc * N, 0.0);
  dqy.assign(nc * N, 0.0);
  if (p.inert()) return;
  const double bound = viscous_dt_bound(s, p);
  if (dt > bound) throw ViscousStepError(dt, bound);
  const auto w = detail::prepare(s, p);

  if (p.nu > 0.0) {
    std::vector<double> hl(N), dg, of;
    std::vector<Vec2> gu(N), gv(N);
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
      const auto &tv = m.triangles[t];
      const double hmin = std::min({s.h[tv[0]], s.h[tv[1]], s.h[tv[2]]});
      if (hmin <= s.h_dry) continue;
      for (int a = 0; a < N; ++a) hl[a] = s.layers.l[a] * hmin;
      detail::stress_coefficients(hl, p.nu, dg, of);
      for (int a = 0; a < N; ++a) {
        gu[a] = gv[a] = Vec2{};
        for (int k = 0; k < 3; ++k) {
          gu[a] += m.tri_grad[t][k] * w.u[tv[k] * N + a];
          gv[a] += m.tri_grad[t][k] * w.v[tv[k] * N + a];
        }
      }
      for (int a = 0; a < N; ++a) {
        Vec2 fu = gu[a] * dg[a], fv = gv[a] * dg[a];
        if (a > 0) {
          fu += gu[a - 1] * of[a - 1];
          fv += gv[a - 1] * of[a - 1];
        }
        if (a + 1 < N) {
          fu += gu[a + 1] * of[a];
          fv += gv[a + 1] * of[a];
        }
        for (int k = 0; k < 3; ++k) {
          const int j = tv[k];
          const double sc = -dt * m.tri_area[t] / m.area[j];
          dqx[j * N + a] += sc * dot(m.tri_grad[t][k], fu);
          dqy[j * N + a] += sc * dot(m.tri_grad[t][k], fv);
        }
      }
    }
  }

  for (std::size_t i = 0; i < nc; ++i) {
    if (s.h[i] <= s.h_dry) {
      for (int a = 0; a < N; ++a) dqx[i * N + a] = dqy[i * N + a] = 0.0;
      continue;
    }
    for (int a = 0; a + 1 < N; ++a) {
      const double G = w.gam[i * (N - 1) + a];
      const double fx = dt * G * (w.u[i * N + a + 1] - w.u[i * N + a]);
      const double fy = dt * G * (w.v[i * N + a + 1] - w.v[i * N + a]);
      dqx[i * N + a] += fx;
      dqy[i * N + a] += fy;
      dqx[i * N + a + 1] -= fx;
      dqy[i * N + a + 1] -= fy;
    }
    const double k = detail::friction(s, p, i);
    dqx[i * N] -= dt * k * w.u[i * N];
    dqy[i * N] -= dt * k * w.v[i * N];
    dqx[i * N + N - 1] += dt * p.W * p.ts.x;
    dqy[i * N + N - 1] += dt * p.W * p.ts.y;
  }
}

}  // namespace layerflow
