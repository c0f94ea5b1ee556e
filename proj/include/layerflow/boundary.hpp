#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "kinetic_flux.hpp"
#include "vec2.hpp"

namespace layerflow {

/// Piecewise-linear function of time, written "t:v, t:v, ..." or a bare constant.
/// Held constant outside the tabulated range.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double c) : pts_{{0.0, c}} {}
  explicit TimeSeries(std::vector<std::pair<double, double>> pts) : pts_(std::move(pts)) {
    if (pts_.empty()) throw ConfigError("empty time series");
    for (std::size_t k = 1; k < pts_.size(); ++k)
      if (!(pts_[k].first > pts_[k - 1].first)) throw ConfigError("time series abscissae must increase");
  }

  static TimeSeries parse(const std::string &text) {
    std::vector<std::pair<double, double>> pts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto p = item.find_first_not_of(" \t");
      if (p == std::string::npos) continue;
      const auto colon = item.find(':');
      try {
        std::size_t used = 0;
        if (colon == std::string::npos) {
          const double v = std::stod(item, &used);
          if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
          pts.push_back({0.0, v});
        } else {
          pts.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        }
      } catch (const std::logic_error &) {
        throw ConfigError("malformed time series entry '" + item + "'");
      }
    }
    if (pts.size() > 1 && text.find(':') == std::string::npos)
      throw ConfigError("time series with several values needs 't:v' pairs");
    return TimeSeries(std::move(pts));
  }

  bool empty() const { return pts_.empty(); }

  double operator()(double t) const {
    if (pts_.empty()) throw ConfigError("boundary value requested but not configured");
    if (t <= pts_.front().first) return pts_.front().second;
    if (t >= pts_.back().first) return pts_.back().second;
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                               [](double x, const std::pair<double, double> &p) { return x < p.first; });
    const auto &b = *it, &a = *(it - 1);
    const double w = (t - a.first) / (b.first - a.first);
    return (1.0 - w) * a.second + w * b.second;
  }

 private:
  std::vector<std::pair<double, double>> pts_;
};

enum class BoundaryKind { wall, fluvial_flux, fluvial_depth, torrential_in, torrential_out, analytic };

inline BoundaryKind parse_boundary_kind(const std::string &s) {
  if (s == "wall") return BoundaryKind::wall;
  if (s == "fluvial_flux") return BoundaryKind::fluvial_flux;
  if (s == "fluvial_depth") return BoundaryKind::fluvial_depth;
  if (s == "torrential_in") return BoundaryKind::torrential_in;
  if (s == "torrential_out") return BoundaryKind::torrential_out;
  if (s == "analytic") return BoundaryKind::analytic;
  throw ConfigError("unknown boundary kind '" + s + "'");
}

/// Prescribed column state used by the `analytic` boundary kind.
struct BoundaryData {
  double h = 0.0;
  std::vector<double> u, v;
};

using BoundaryFunction = std::function<BoundaryData(double t, Vec2 x)>;

/// Condition attached to one boundary tag. `q` is the outward normal discharge
/// q_g.n of the whole column (negative for inflow), split over layers by l_a
/// unless per-layer series are given.
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::wall;
  TimeSeries h;
  TimeSeries q;
  std::vector<TimeSeries> q_layers;
  BoundaryFunction data;

  double layer_discharge(double t, int a, double la) const {
    if (!q_layers.empty()) return q_layers.at(a)(t);
    return la * q(t);
  }
};

/// Counters for fallback paths taken while building ghost states.
struct BoundaryDiagnostics {
  long depth_given_torrential_out = 0;
  long depth_given_missing_condition = 0;
  long torrential_in_not_inflow = 0;
  long flux_given_unsolvable = 0;
  long newton_iterations = 0;
};

// ---------------------------------------------------------------------------
// scalar functions of the boundary solves

/// phi(m) = (1/pi) int_{z <= -sqrt2 m} (sqrt2 m + z) sqrt(1 - z^2/4) dz.
inline double phi(double m) {
  const double a = std::numbers::sqrt2 * m;
  if (a >= 2.0) return 0.0;
  if (a <= -2.0) return a;
  const auto J = detail::upper_moments(a);
  return a * J.j0 - J.j1;
}

inline double phi_prime(double m) {
  const double a = std::numbers::sqrt2 * m;
  if (a >= 2.0) return 0.0;
  if (a <= -2.0) return std::numbers::sqrt2;
  return std::numbers::sqrt2 * detail::upper_moments(a).j0;
}

struct NewtonResult {
  double m = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton iteration from m = 0 restricted to m < sqrt2; the step is
/// halved until the residual decreases and the iterate stays in range.
template <class F, class DF>
NewtonResult newton_m(F &&f, DF &&df, const std::string &what, double tol = 1e-10, int max_it = 50) {
  constexpr double mmax = std::numbers::sqrt2;
  double m = 0.0;
  double r = f(m);
  int it = 0;
  while (std::abs(r) > tol) {
    if (it >= max_it) throw ConvergenceError(what + ": Newton did not converge", std::abs(r), it);
    ++it;
    const double d = df(m);
    double step = (d != 0.0 && std::isfinite(d)) ? -r / d : (r > 0 ? -1.0 : 1.0);
    double mn = m + step, rn = f(mn);
    for (int k = 0; k < 60 && (mn >= mmax || !std::isfinite(rn) || std::abs(rn) >= std::abs(r)); ++k) {
      step *= 0.5;
      mn = m + step;
      rn = f(mn);
    }
    if (mn >= mmax || !std::isfinite(rn)) throw ConvergenceError(what + ": Newton left the admissible range", std::abs(r), it);
    if (std::abs(rn) >= std::abs(r)) throw ConvergenceError(what + ": Newton stalled", std::abs(r), it);
    m = mn;
    r = rn;
  }
  return {m, std::abs(r), it};
}

/// Ghost quantities of one layer: depth, normal and tangential velocity.
/// `inactive` means the ghost contributes no incoming flux at all.
struct Ghost {
  double h = 0.0;
  double un = 0.0;
  double ut = 0.0;
  bool inactive = false;
};

/// Solves m - 2 - (a2/K) phi(m)^(1/3) = 0 for a prescribed incoming mass flux a1 < 0.
inline Ghost fluvial_flux_ghost(double a1, double a2, double g, NewtonResult *info = nullptr) {
  if (a1 >= 0.0) return {0.0, 0.0, 0.0, true};
  const double K = std::cbrt(std::numbers::sqrt2 * g * a1);
  const double r = a2 / K;
  auto f = [&](double m) { return m - 2.0 - r * std::cbrt(phi(m)); };
  auto df = [&](double m) {
    const double p = phi(m);
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    const double c = std::cbrt(p);
    return 1.0 - r * phi_prime(m) / (3.0 * c * c);
  };
  const NewtonResult res = newton_m(f, df, "fluvial flux-given boundary");
  if (info) *info = res;
  const double he = (a2 / (res.m - 2.0)) * (a2 / (res.m - 2.0)) / g;
  return {he, res.m * std::sqrt(g * he), 0.0, false};
}

/// Solves phi(m) = sqrt(2/g) a1 / h_g^(3/2) for a torrential inflow.
inline Ghost torrential_in_ghost(double a1, double hg, double g, NewtonResult *info = nullptr) {
  if (hg < 0.0) throw ConfigError("prescribed depth must be nonnegative");
  if (a1 >= 0.0 || hg == 0.0) return {hg, 0.0, 0.0, true};
  const double rhs = std::sqrt(2.0 / g) * a1 / std::pow(hg, 1.5);
  const NewtonResult res =
      newton_m([&](double m) { return phi(m) - rhs; }, [&](double m) { return phi_prime(m); }, "torrential inflow boundary");
  if (info) *info = res;
  return {hg, res.m * std::sqrt(g * hg), 0.0, false};
}

/// Fluvial depth-given ghost of one layer with interior depth h, velocity (un, ut).
inline Ghost fluvial_depth_ghost(double h, double un, double ut, double hg, double g,
                                 BoundaryDiagnostics *diag = nullptr) {
  if (hg < 0.0) throw ConfigError("prescribed depth must be nonnegative");
  const double c = std::sqrt(g * h);
  const double ut_e = hg > 0.0 ? ut * h / hg : 0.0;
  if ((un - c) * (un + c) <= 0.0)
    return {hg, un + 2.0 * std::sqrt(g) * (std::sqrt(h) - std::sqrt(hg)), ut_e, false};
  if (un < 0.0) {
    if (diag) ++diag->depth_given_missing_condition;
    return {hg, un, ut_e, false};
  }
  if (diag) ++diag->depth_given_torrential_out;
  return {h, un, ut, false};
}

/// Per-layer wall flux: no mass, hydrostatic normal pressure only.
inline FluxTriple wall_flux(double h, double la, Vec2 n, double g) {
  const double p = 0.5 * g * la * h * h;
  return {0.0, p * n.x, p * n.y};
}

/// Boundary flux of layer a at a face with outward normal n: F+(interior) + F-(ghost).
inline FluxTriple boundary_layer_flux(double h, double u, double v, const Ghost &ge, Vec2 n, double la, double g) {
  FluxTriple f = half_flux_plus(h, u, v, n, g);
  if (!ge.inactive && ge.h > 0.0) {
    const Vec2 t{-n.y, n.x};
    const Vec2 ue = n * ge.un + t * ge.ut;
    f += half_flux_minus(ge.h, ue.x, ue.y, n, g);
  }
  return f * la;
}

/// Builds the ghost of one layer for the given condition. `a` is the layer
/// index, la its fraction; (u, v) the interior layer velocity; x the face point.
inline Ghost make_ghost(const BoundarySpec &bc, double t, Vec2 x, double h, double u, double v, int a, double la,
                        Vec2 n, double g, BoundaryDiagnostics *diag = nullptr) {
  const Vec2 tv{-n.y, n.x};
  const double un = u * n.x + v * n.y, ut = u * tv.x + v * tv.y;
  auto flux_given = [&](double qn) {
    const double a1 = qn - half_flux_plus(h, u, v, n, g).h;
    const double a2 = un - 2.0 * std::sqrt(g * h);
    NewtonResult info;
    try {
      Ghost ge = fluvial_flux_ghost(a1, a2, g, &info);
      if (diag) diag->newton_iterations += info.iterations;
      return ge;
    } catch (const ConvergenceError &) {
      if (diag) ++diag->flux_given_unsolvable;
      // prescribed inflow out of reach of the outgoing invariant: impose it as a torrential inflow at the interior depth
      if (h <= 0.0) return Ghost{0.0, 0.0, 0.0, true};
      return torrential_in_ghost(a1, h, g);
    }
  };
  switch (bc.kind) {
    case BoundaryKind::wall: {
      return {h, -un, ut, false};
    }
    case BoundaryKind::torrential_out:
      return {h, un, ut, false};
    case BoundaryKind::fluvial_depth:
      return fluvial_depth_ghost(h, un, ut, bc.h(t), g, diag);
    case BoundaryKind::fluvial_flux:
      return flux_given(bc.layer_discharge(t, a, la) / la);
    case BoundaryKind::torrential_in: {
      const double hg = bc.h(t);
      const double a1 = bc.layer_discharge(t, a, la) / la - half_flux_plus(h, u, v, n, g).h;
      if (a1 >= 0.0 && diag) ++diag->torrential_in_not_inflow;
      NewtonResult info;
      Ghost ge = torrential_in_ghost(a1, hg, g, &info);
      if (diag) diag->newton_iterations += info.iterations;
      return ge;
    }
    case BoundaryKind::analytic: {
      const BoundaryData d = bc.data(t, x);
      const double ua = d.u.at(a), va = d.v.at(a);
      const double gn = ua * n.x + va * n.y, gt = ua * tv.x + va * tv.y;
      const double c = std::sqrt(g * d.h);
      if (std::abs(gn) < c) {
        if (gn < 0.0) {
          Ghost ge = flux_given(d.h * gn);
          ge.ut = gt;
          return ge;
        }
        return fluvial_depth_ghost(h, un, ut, d.h, g, diag);
      }
      if (gn < 0.0) {
        const double a1 = d.h * gn - half_flux_plus(h, u, v, n, g).h;
        Ghost ge = torrential_in_ghost(a1, d.h, g);
        ge.ut = gt;
        return ge;
      }
      return {h, un, ut, false};
    }
  }
  return {h, un, ut, false};
}

}  // namespace layerflow
