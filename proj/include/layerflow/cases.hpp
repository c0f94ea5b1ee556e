#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <iomanip>
#include <sstream>
#include <string>

#include "analytic.hpp"
#include "errors.hpp"
#include "mesh_gen.hpp"

namespace layerflow {

/// Key/value parameters of a generated case, e.g. "nx=40,layers=3".
class CaseParams {
 public:
  CaseParams() = default;
  explicit CaseParams(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  static CaseParams parse(const std::string &text) {
    CaseParams p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("case parameter '" + item + "' is not key=value");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      p.kv_[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return p;
  }

  double num(const std::string &key, double fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::logic_error &) {
      throw ConfigError("case parameter '" + key + "' is not a number: '" + it->second + "'");
    }
  }
  int integer(const std::string &key, int fallback) const {
    const double v = num(key, fallback);
    if (v != std::floor(v)) throw ConfigError("case parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  std::string str(const std::string &key, const std::string &fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }
  bool has(const std::string &key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string> &items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

inline ChannelParams channel_params(const CaseParams &p) {
  ChannelParams c;
  c.alpha = p.num("alpha", c.alpha);
  c.beta = p.num("beta", c.beta);
  c.zbar = p.num("zbar", c.zbar);
  c.xmax = p.num("xmax", c.xmax);
  c.g = p.num("g", c.g);
  return c;
}

inline ThackerParams thacker_params(const CaseParams &p) {
  ThackerParams c;
  c.alpha = p.num("alpha", c.alpha);
  c.beta = p.num("beta", c.beta);
  c.gamma = p.num("gamma", c.gamma);
  c.c = p.num("c", c.c);
  c.g = p.num("g", c.g);
  return c;
}

inline DrainingParams draining_params(const CaseParams &p) {
  DrainingParams c;
  c.alpha = p.num("alpha", c.alpha);
  c.beta = p.num("beta", c.beta);
  c.t0 = p.num("t0", c.t0);
  c.t1 = p.num("t1", c.t1);
  c.theta = p.num("theta", c.theta);
  c.L = p.num("L", c.L);
  c.nu = p.num("nu", c.nu);
  c.zb0 = p.num("zb0", c.zb0);
  c.g = p.num("g", c.g);
  return c;
}

/// Analytic reference of a named case.
inline AnalyticCase make_case(const std::string &name, const CaseParams &p) {
  if (name == "channel") return stationary_channel(channel_params(p));
  if (name == "thacker") return thacker_bowl(thacker_params(p));
  if (name == "draining") return draining_tank(draining_params(p));
  throw ConfigError("unknown analytic case '" + name + "'");
}

/// Channel strip [0, xmax] x [0, width]: inflow on the left, outflow on the right.
inline Triangulation channel_mesh(int nx, int ny, const ChannelParams &c = {}, double width = -1.0,
                                  Diagonals d = Diagonals::alternating) {
  RectangleSpec s;
  s.x1 = c.xmax;
  s.y1 = width > 0.0 ? width : ny * c.xmax / nx;
  s.nx = nx;
  s.ny = ny;
  s.diagonals = d;
  s.tags = {"wall", "outflow", "wall", "inflow"};
  const auto ref = stationary_channel(c);
  return rectangle_mesh(s, ref.zb);
}

/// Square [-half, half]^2 around the paraboloid, closed by walls.
inline Triangulation thacker_mesh(int n, const ThackerParams &c = {}, double half = 0.32,
                                  Diagonals d = Diagonals::union_jack) {
  RectangleSpec s;
  s.x0 = s.y0 = -half;
  s.x1 = s.y1 = half;
  s.nx = s.ny = n;
  s.diagonals = d;
  const double al = c.alpha;
  return rectangle_mesh(s, [al](double x, double y) { return 0.5 * al * (x * x + y * y); });
}

/// Tank [0, 5] x [0, 1] with the open boundary data taken from the reference.
inline Triangulation draining_mesh(int nx, int ny, const DrainingParams &c = {}, double x1 = 5.0, double y1 = 1.0,
                                   Diagonals d = Diagonals::alternating) {
  RectangleSpec s;
  s.x1 = x1;
  s.y1 = y1;
  s.nx = nx;
  s.ny = ny;
  s.diagonals = d;
  s.tags = {"open", "open", "open", "open"};
  const double zb0 = c.zb0;
  return rectangle_mesh(s, [zb0](double, double) { return zb0; });
}

/// Smooth random hills on the unit square.
inline std::function<double(double, double)> random_hills(std::uint64_t seed, int count = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> P(0.1, 0.9), A(0.2, 0.9), W(20.0, 60.0);
  struct Hill {
    double x, y, a, w;
  };
  std::vector<Hill> hills;
  for (int k = 0; k < count; ++k) hills.push_back({P(rng), P(rng), A(rng), W(rng)});
  return [hills](double x, double y) {
    double z = 0.05 * std::sin(3.0 * x) * std::cos(2.0 * y);
    for (const auto &h : hills) z += h.a * std::exp(-h.w * ((x - h.x) * (x - h.x) + (y - h.y) * (y - h.y)));
    return z;
  };
}

inline Triangulation lake_mesh(int n, std::uint64_t seed = 1) {
  RectangleSpec s;
  s.nx = s.ny = n;
  s.jitter = 0.25;
  s.diagonals = Diagonals::random;
  s.seed = seed;
  return rectangle_mesh(s, random_hills(seed));
}

/// Mirror-symmetric square [-half, half]^2 with a symmetric bed.
inline Triangulation gaussian_mesh(int n, double half = 1.0, double depth = 1.0) {
  RectangleSpec s;
  s.x0 = s.y0 = -half;
  s.x1 = s.y1 = half;
  s.nx = s.ny = n;
  s.diagonals = Diagonals::union_jack;
  auto t = rectangle_mesh(s, [depth](double x, double y) { return -depth + 0.1 * (x * x + y * y); });
  // mirrored nodes are exact negatives of each other
  const double dx = 2.0 * half / n;
  for (auto &p : t.nodes) {
    p.x = dx * std::round(p.x / dx);
    p.y = dx * std::round(p.y / dx);
  }
  for (std::size_t k = 0; k < t.nodes.size(); ++k) t.zb[k] = -depth + 0.1 * (t.nodes[k].x * t.nodes[k].x + t.nodes[k].y * t.nodes[k].y);
  return t;
}

/// Mesh and INI text of a ready-to-run case; the config refers to `<name>.mesh`.
struct GeneratedCase {
  Triangulation mesh;
  std::string config;
};

inline GeneratedCase generate_case(const std::string &name, const CaseParams &p) {
  static const std::map<std::string, std::vector<std::string>> allowed{
      {"channel", {"nx", "ny", "width", "alpha", "beta", "zbar", "xmax", "g"}},
      {"thacker", {"n", "half", "alpha", "beta", "gamma", "c", "g"}},
      {"draining", {"nx", "ny", "alpha", "beta", "t0", "t1", "theta", "L", "nu", "zb0", "g"}},
      {"lake", {"n", "seed", "level"}},
      {"gaussian", {"n", "half", "amplitude", "sigma"}}};
  const auto known = allowed.find(name);
  if (known == allowed.end()) throw ConfigError("unknown case '" + name + "' (channel, thacker, draining, lake, gaussian)");
  for (const auto &[k, v] : p.items()) {
    (void)v;
    static const std::vector<std::string> generic{"layers", "order", "t_end"};
    const auto &mk = known->second;
    const bool ok = std::find(generic.begin(), generic.end(), k) != generic.end() ||
                    std::find(mk.begin(), mk.end(), k) != mk.end();
    if (!ok) throw ConfigError("case '" + name + "' has no parameter '" + k + "'");
  }
  std::ostringstream ini;
  ini << std::setprecision(17);
  const int layers = p.integer("layers", 1);
  if (layers < 1) throw ConfigError("case parameter 'layers' must be at least 1");
  const int order = p.integer("order", 1);
  auto common = [&](double t_end) {
    ini << "[mesh]\nfile = " << name << ".mesh\n\n[layers]\ncount = " << layers << "\n\n[time]\nt_end = "
        << p.num("t_end", t_end) << "\norder = " << order << "\n\n";
  };
  auto case_section = [&](const std::vector<std::string> &keys) {
    ini << "[case." << name << "]\n";
    for (const auto &[k, v] : p.items())
      if (std::find(keys.begin(), keys.end(), k) != keys.end()) ini << k << " = " << v << '\n';
    ini << '\n';
  };
  GeneratedCase out;
  if (name == "channel") {
    const ChannelParams c = channel_params(p);
    out.mesh = channel_mesh(p.integer("nx", 49), p.integer("ny", 5), c, p.num("width", 2.0));
    common(60.0);
    case_section({"alpha", "beta", "zbar", "xmax", "g"});
    ini << "[initial]\ntype = case\n\n[boundary.inflow]\nkind = analytic\n\n[boundary.outflow]\nkind = "
           "analytic\n\n[boundary.wall]\nkind = wall\n\n[gauges]\nmid = "
        << 0.5 * c.xmax << ", " << 0.5 * p.num("width", 2.0) << "\n\n[output]\ndir = output\ninterval = 10\n";
  } else if (name == "thacker") {
    const ThackerParams c = thacker_params(p);
    out.mesh = thacker_mesh(p.integer("n", 35), c, p.num("half", 0.32));
    common(c.period());
    case_section({"alpha", "beta", "gamma", "c", "g"});
    ini << "[initial]\ntype = case\n\n[boundary.wall]\nkind = wall\n\n[gauges]\norigin = 0, 0\n\n[output]\ndir = "
           "output\ninterval = "
        << c.period() / 4.0 << '\n';
  } else if (name == "draining") {
    const DrainingParams c = draining_params(p);
    out.mesh = draining_mesh(p.integer("nx", 48), p.integer("ny", 9), c);
    common(1.0);
    case_section({"alpha", "beta", "t0", "t1", "theta", "L", "nu", "zb0", "g"});
    ini << "[initial]\ntype = case\n\n[boundary.open]\nkind = analytic\n\n[gauges]\nprofile = " << 0.5 * c.L
        << ", 0.5\n\n[output]\ndir = output\ninterval = 0.25\n";
  } else if (name == "lake") {
    out.mesh = lake_mesh(p.integer("n", 22), static_cast<std::uint64_t>(p.integer("seed", 1)));
    common(0.5);
    ini << "[initial]\ntype = lake\nlevel = " << p.num("level", 0.5)
        << "\n\n[boundary.wall]\nkind = wall\n\n[output]\ndir = output\n";
  } else {
    const double half = p.num("half", 1.0);
    out.mesh = gaussian_mesh(p.integer("n", 40), half);
    common(0.5);
    ini << "[initial]\ntype = lake\nlevel = 0\n\n[boundary.wall]\nkind = wall\n\n[source]\ntype = "
           "gaussian\ntime = 0\namplitude = "
        << p.num("amplitude", 0.05) << "\nsigma = " << p.num("sigma", 0.15 * half)
        << "\nx = 0\ny = 0\n\n[gauges]\ncentre = 0, 0\neast = " << 0.5 * half << ", 0\nnorth = 0, " << 0.5 * half
        << "\n\n[output]\ndir = output\n";
  }
  out.config = ini.str();
  return out;
}

}  // namespace layerflow
