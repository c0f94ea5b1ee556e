#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "errors.hpp"
#include "exchange.hpp"
#include "kinetic_flux.hpp"
#include "layer_state.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "viscous.hpp"

namespace layerflow {

struct StepControl {
  double beta = 0.45;
  double dt_max = 1e30;
  double t_end = 0.0;
  int order = 1;

  void check() const {
    if (!(beta > 0.0 && beta < 0.5)) throw ConfigError("CFL constant must lie in (0, 0.5)");
    if (!(dt_max > 0.0)) throw ConfigError("maximal time step must be positive");
    if (order != 1 && order != 2) throw ConfigError("order must be 1 or 2");
  }
};

/// Interface values at the midpoints of the half-edges (CSR order).
struct Reconstruction {
  std::vector<double> h, eta;
  std::vector<double> u, v;  // half-edge-major, N per half-edge
};

/// Step parameters of the modified Heun scheme.
struct HeunWeights {
  double dt = 0.0;
  double gamma = 0.0;
};

inline HeunWeights heun_weights(double dt1, double dt2) {
  if (!(dt1 > 0.0 && dt2 > 0.0)) throw DomainError("Heun stage steps must be positive");
  if (dt1 == dt2) return {dt1, 0.5};
  const double dt = 2.0 * dt1 * dt2 / (dt1 + dt2);
  return {dt, dt * dt / (2.0 * dt1 * dt2)};
}

struct SolverOptions {
  StepControl control;
  RheologyParams rheology;
  /// Indexed by the mesh tag id.
  std::vector<BoundarySpec> boundaries;
  int threads = 1;
};

/// Finite-volume solver bound to one mesh and layer configuration.
class Solver {
 public:
  Solver(const Mesh &mesh, SolverOptions opt) : mesh_(mesh), opt_(std::move(opt)) {
    opt_.control.check();
    opt_.rheology.check();
    if (opt_.boundaries.size() < mesh_.tags.size())
      throw ConfigError("no boundary condition for tag '" + mesh_.tags[opt_.boundaries.size()] + "'");
    edge_half_.resize(mesh_.num_edges());
    for (std::size_t i = 0; i < mesh_.num_cells(); ++i)
      for (int k = mesh_.cell_offset[i]; k < mesh_.cell_offset[i + 1]; ++k) {
        const auto &he = mesh_.half_edges[k];
        edge_half_[he.edge][he.neighbor > static_cast<int>(i) ? 0 : 1] = k;
      }
    build_least_squares();
  }

  const Mesh &mesh() const { return mesh_; }
  const SolverOptions &options() const { return opt_; }
  SolverOptions &options() { return opt_; }
  BoundaryDiagnostics diagnostics;

  /// Limited linear reconstruction of (h, eta, u_a, v_a) at edge midpoints.
  Reconstruction muscl_reconstruct(const State &s) const {
    const int N = s.N();
    const std::size_t nc = s.cells(), nh = mesh_.half_edges.size();
    Reconstruction r;
    r.h.resize(nh);
    r.eta.resize(nh);
    r.u.resize(nh * N);
    r.v.resize(nh * N);
    parallel_for(nc, opt_.threads, [&](std::size_t i) {
      const int b = mesh_.cell_offset[i], e = mesh_.cell_offset[i + 1];
      bool flat = s.h[i] <= s.h_dry;
      for (int k = b; k < e && !flat; ++k) flat = s.h[mesh_.half_edges[k].neighbor] <= s.h_dry;
      if (flat || !ls_ok_[i]) {
        for (int k = b; k < e; ++k) {
          r.h[k] = s.h[i];
          r.eta[k] = s.eta(i);
          for (int a = 0; a < N; ++a) {
            r.u[k * N + a] = s.u(i, a);
            r.v[k * N + a] = s.v(i, a);
          }
        }
        return;
      }
      auto limited = [&](auto &&val, double extra_cap, bool cap_mean, double *out, int stride) {
        const double vi = val(static_cast<int>(i));
        Vec2 rhs{};
        double lo = vi, hi = vi;
        for (int k = b; k < e; ++k) {
          const int j = mesh_.half_edges[k].neighbor;
          const double vj = val(j);
          const Vec2 d = mesh_.nodes[j] - mesh_.nodes[i];
          rhs += d * (vj - vi);
          lo = std::min(lo, vj);
          hi = std::max(hi, vj);
        }
        const auto &M = ls_inv_[i];
        const Vec2 g{M[0] * rhs.x + M[1] * rhs.y, M[2] * rhs.x + M[3] * rhs.y};
        double psi = 1.0, mean = 0.0;
        for (int k = b; k < e; ++k) {
          const int j = mesh_.half_edges[k].neighbor;
          const double dv = 0.5 * dot(g, mesh_.nodes[j] - mesh_.nodes[i]);
          mean += mesh_.half_edges[k].length * dv;
          if (dv > 0.0)
            psi = std::min(psi, (hi - vi) / dv);
          else if (dv < 0.0)
            psi = std::min(psi, (lo - vi) / dv);
        }
        if (cap_mean && mean > 0.0) psi = std::min(psi, extra_cap / mean);
        psi = std::max(psi, 0.0);
        for (int k = b; k < e; ++k) {
          const int j = mesh_.half_edges[k].neighbor;
          out[k * stride] = vi + psi * 0.5 * dot(g, mesh_.nodes[j] - mesh_.nodes[i]);
        }
      };
      limited([&](int j) { return s.h[j]; }, mesh_.perimeter[i] * s.h[i], true, r.h.data(), 1);
      limited([&](int j) { return s.eta(j); }, 0.0, false, r.eta.data(), 1);
      for (int a = 0; a < N; ++a) {
        limited([&](int j) { return s.u(j, a); }, 0.0, false, r.u.data() + a, N);
        limited([&](int j) { return s.v(j, a); }, 0.0, false, r.v.data() + a, N);
      }
      for (int k = b; k < e; ++k) r.h[k] = std::max(r.h[k], 0.0);
    });
    return r;
  }

  /// Hyperbolic CFL step combined with the viscous bound and dt_max.
  double compute_dt(const State &s) const {
    if (opt_.control.order == 2) {
      const Reconstruction r = muscl_reconstruct(s);
      return compute_dt(s, &r);
    }
    return compute_dt(s, nullptr);
  }

  /// One forward Euler step of the full splitting (fluxes, exchange, rheology).
  void euler_step(State &s, double dt) {
    if (opt_.control.order == 2) {
      const Reconstruction r = muscl_reconstruct(s);
      euler_step(s, dt, &r);
    } else {
      euler_step(s, dt, nullptr);
    }
  }

  /// One step of the configured order, never passing t_target. Returns the step.
  double step(State &s, double t_target) {
    const double remaining = t_target - s.t;
    if (!(remaining > 0.0)) return 0.0;
    if (opt_.control.order == 1) {
      double dt = compute_dt(s, nullptr);
      bool last = false;
      if (dt >= remaining) {
        dt = remaining;
        last = true;
      }
      euler_step(s, dt, nullptr);
      if (last) s.t = t_target;
      return dt;
    }
    // modified Heun
    Reconstruction r = muscl_reconstruct(s);
    double dt1 = compute_dt(s, &r);
    bool capped = false;
    if (dt1 >= remaining) {
      dt1 = remaining;
      capped = true;
    }
    State y1 = s;
    euler_step(y1, dt1, &r);
    r = muscl_reconstruct(y1);
    double dt2 = compute_dt(y1, &r);
    if (capped && dt2 >= dt1) dt2 = dt1;
    State y2 = y1;
    euler_step(y2, dt2, &r);
    const HeunWeights w = heun_weights(dt1, dt2);
    combine(s, y2, w.gamma);
    if (capped && dt2 == dt1)
      s.t = t_target;
    else
      s.t += w.dt;
    last_heun_ = w;
    return w.dt;
  }

  /// Advances to t_target; `on_step` runs after every accepted step.
  void advance(State &s, double t_target, const std::function<void(const State &, double)> &on_step = {}) {
    while (s.t < t_target) {
      const double dt = step(s, t_target);
      if (on_step) on_step(s, dt);
    }
  }

  HeunWeights last_heun() const { return last_heun_; }

  /// Per-cell, per-layer mass-flux divergence of the last Euler stage.
  const std::vector<double> &last_divergence() const { return div_; }

 private:
  double compute_dt(const State &s, const Reconstruction *r) const {
    const int N = s.N();
    double dt = opt_.control.dt_max;
    const double sq = std::sqrt(2.0 * s.g);
    for (std::size_t i = 0; i < s.cells(); ++i) {
      double vm = 0.0;
      for (int a = 0; a < N; ++a) vm = std::max(vm, std::abs(s.u(i, a)) + std::abs(s.v(i, a)));
      vm += sq * std::sqrt(s.h[i]);
      if (r)
        for (int k = mesh_.cell_offset[i]; k < mesh_.cell_offset[i + 1]; ++k) {
          double w = 0.0;
          for (int a = 0; a < N; ++a) w = std::max(w, std::abs(r->u[k * N + a]) + std::abs(r->v[k * N + a]));
          vm = std::max(vm, w + sq * std::sqrt(r->h[k]));
        }
      if (vm > 0.0) dt = std::min(dt, opt_.control.beta * mesh_.area[i] / (mesh_.perimeter[i] * vm));
    }
    if (!opt_.rheology.inert()) dt = std::min(dt, viscous_dt_bound(s, opt_.rheology));
    return dt;
  }

  void euler_step(State &s, double dt, const Reconstruction *r) {
    const int N = s.N();
    const std::size_t nc = s.cells(), ne = mesh_.num_edges();
    const auto &l = s.layers.l;
    const double g = s.g;

    // cell velocities
    vel_u_.resize(nc * N);
    vel_v_.resize(nc * N);
    for (std::size_t i = 0; i < nc; ++i)
      for (int a = 0; a < N; ++a) {
        vel_u_[i * N + a] = s.u(i, a);
        vel_v_[i * N + a] = s.v(i, a);
      }

    // interior edges
    flux_.resize(ne * N);
    src_.resize(ne * N * 2);
    parallel_for(ne, opt_.threads, [&](std::size_t e) {
      const Edge &ed = mesh_.edges[e];
      SideState si, sj;
      if (r) {
        const int ki = edge_half_[e][0], kj = edge_half_[e][1];
        si = {r->h[ki], r->eta[ki] - r->h[ki], r->u.data() + ki * N, r->v.data() + ki * N};
        sj = {r->h[kj], r->eta[kj] - r->h[kj], r->u.data() + kj * N, r->v.data() + kj * N};
      } else {
        si = {s.h[ed.i], mesh_.zb[ed.i], vel_u_.data() + ed.i * N, vel_v_.data() + ed.i * N};
        sj = {s.h[ed.j], mesh_.zb[ed.j], vel_u_.data() + ed.j * N, vel_v_.data() + ed.j * N};
      }
      const HRPair p = edge_flux(si, sj, ed.normal, l, g, flux_.data() + e * N);
      const Vec2 a_i = hr_source(p.h_ij, si, s.h[ed.i], mesh_.zb[ed.i], ed.normal, g);
      const Vec2 a_j = hr_source(p.h_ji, sj, s.h[ed.j], mesh_.zb[ed.j], -ed.normal, g);
      for (int a = 0; a < N; ++a) {
        src_[(e * N + a) * 2] = a_i * l[a];
        src_[(e * N + a) * 2 + 1] = a_j * l[a];
      }
    });

    // boundary faces
    bflux_.resize(mesh_.faces.size() * N);
    for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
      const BoundaryFace &bf = mesh_.faces[f];
      const BoundarySpec &bc = opt_.boundaries[bf.tag];
      const int i = bf.node;
      for (int a = 0; a < N; ++a) {
        if (bc.kind == BoundaryKind::wall) {
          bflux_[f * N + a] = wall_flux(s.h[i], l[a], bf.normal, g);
          continue;
        }
        const double u = vel_u_[i * N + a], v = vel_v_[i * N + a];
        const Ghost ge = make_ghost(bc, s.t, mesh_.nodes[i], s.h[i], u, v, a, l[a], bf.normal, g, &diagnostics);
        bflux_[f * N + a] = boundary_layer_flux(s.h[i], u, v, ge, bf.normal, l[a], g);
      }
    }

    // cell update
    div_.assign(nc * N, 0.0);
    std::vector<double> hnew(nc);
    std::vector<double> qx = s.qx, qy = s.qy;
    std::vector<std::ptrdiff_t> bad(nc, -1);
    parallel_for(nc, opt_.threads, [&](std::size_t i) {
      const double sc = dt / mesh_.area[i];
      double mass_abs = 0.0;
      for (int k = mesh_.cell_offset[i]; k < mesh_.cell_offset[i + 1]; ++k) {
        const HalfEdge &he = mesh_.half_edges[k];
        const bool own = he.neighbor > static_cast<int>(i);
        const double sg = own ? 1.0 : -1.0;
        for (int a = 0; a < N; ++a) {
          const FluxTriple &F = flux_[he.edge * N + a];
          const Vec2 S = src_[(he.edge * N + a) * 2 + (own ? 0 : 1)];
          div_[i * N + a] += he.length * sg * F.h;
          mass_abs += he.length * std::abs(F.h);
          qx[i * N + a] -= sc * he.length * (sg * F.hu - S.x);
          qy[i * N + a] -= sc * he.length * (sg * F.hv - S.y);
        }
      }
      for (int f = mesh_.face_offset[i]; f < mesh_.face_offset[i + 1]; ++f) {
        const BoundaryFace &bf = mesh_.faces[f];
        for (int a = 0; a < N; ++a) {
          const FluxTriple &F = bflux_[f * N + a];
          div_[i * N + a] += bf.length * F.h;
          mass_abs += bf.length * std::abs(F.h);
          qx[i * N + a] -= sc * bf.length * F.hu;
          qy[i * N + a] -= sc * bf.length * F.hv;
        }
      }
      double dsum = 0.0;
      for (int a = 0; a < N; ++a) {
        div_[i * N + a] /= mesh_.area[i];
        dsum += div_[i * N + a];
      }
      double h = s.h[i] - dt * dsum;
      if (h < 0.0) {
        if (-h <= 1e-12 * (s.h[i] + sc * mass_abs))
          h = 0.0;
        else
          bad[i] = static_cast<std::ptrdiff_t>(i);
      }
      hnew[i] = h;
      if (h <= s.h_dry) {
        for (int a = 0; a < N; ++a) qx[i * N + a] = qy[i * N + a] = 0.0;
        return;
      }
      if (N > 1) {
        std::vector<double> D(div_.begin() + i * N, div_.begin() + (i + 1) * N);
        const auto G = exchange_rates(D, l);
        bool any = false;
        for (double x : G) any = any || x != 0.0;
        if (!any) return;
        std::vector<double> hl(N), work(N);
        for (int a = 0; a < N; ++a) hl[a] = l[a] * h;
        const Tridiagonal A = build_matrix(G, hl, dt);
        implicit_solve(A, qx.data() + i * N, work.data());
        implicit_solve(A, qy.data() + i * N, work.data());
      }
    });
    for (std::size_t i = 0; i < nc; ++i)
      if (bad[i] >= 0)
        throw SolverError("negative water depth " + std::to_string(hnew[i]), bad[i], s.t + dt);

    s.h = std::move(hnew);
    s.qx = std::move(qx);
    s.qy = std::move(qy);

    if (!opt_.rheology.inert()) {
      std::vector<double> dqx, dqy;
      assemble_viscous_update(s, opt_.rheology, dt, dqx, dqy);
      for (std::size_t k = 0; k < s.qx.size(); ++k) {
        s.qx[k] += dqx[k];
        s.qy[k] += dqy[k];
      }
    }
    s.t += dt;
  }

  static void combine(State &s, const State &y2, double gamma) {
    const double w0 = 1.0 - gamma;
    for (std::size_t i = 0; i < s.h.size(); ++i) s.h[i] = w0 * s.h[i] + gamma * y2.h[i];
    for (std::size_t k = 0; k < s.qx.size(); ++k) {
      s.qx[k] = w0 * s.qx[k] + gamma * y2.qx[k];
      s.qy[k] = w0 * s.qy[k] + gamma * y2.qy[k];
    }
    const int N = s.N();
    for (std::size_t i = 0; i < s.h.size(); ++i)
      if (s.h[i] <= s.h_dry)
        for (int a = 0; a < N; ++a) s.qx[i * N + a] = s.qy[i * N + a] = 0.0;
  }

  void build_least_squares() {
    const std::size_t nc = mesh_.num_cells();
    ls_inv_.assign(nc, {});
    ls_ok_.assign(nc, false);
    for (std::size_t i = 0; i < nc; ++i) {
      double a = 0, b = 0, c = 0, scale = 0;
      for (const auto &he : mesh_.neighbors(i)) {
        const Vec2 d = mesh_.nodes[he.neighbor] - mesh_.nodes[i];
        a += d.x * d.x;
        b += d.x * d.y;
        c += d.y * d.y;
        scale = std::max(scale, dot(d, d));
      }
      const double det = a * c - b * b;
      if (det > 1e-10 * scale * scale) {
        ls_inv_[i] = {c / det, -b / det, -b / det, a / det};
        ls_ok_[i] = true;
      }
    }
  }

  const Mesh &mesh_;
  SolverOptions opt_;
  std::vector<std::array<int, 2>> edge_half_;
  std::vector<std::array<double, 4>> ls_inv_;
  std::vector<bool> ls_ok_;
  std::vector<double> vel_u_, vel_v_, div_;
  std::vector<FluxTriple> flux_, bflux_;
  std::vector<Vec2> src_;
  HeunWeights last_heun_{};
};

}  // namespace layerflow
