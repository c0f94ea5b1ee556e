#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "analytic.hpp"
#include "boundary.hpp"
#include "cases.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "layer_state.hpp"
#include "viscous.hpp"

namespace layerflow {

struct BoundaryEntry {
  BoundaryKind kind = BoundaryKind::wall;
  TimeSeries h;
  TimeSeries q;
  /// Per-layer discharges when `profile = per_layer`.
  std::vector<TimeSeries> q_layers;
};

struct InitialCondition {
  enum class Type { lake, analytic, file };
  Type type = Type::lake;
  double level = 0.0;
  double u = 0.0, v = 0.0;
  std::string file;
};

struct Gauge {
  std::string name;
  Vec2 x;
};

struct OutputConfig {
  std::string dir = "output";
  std::vector<double> epochs;
  double interval = 0.0;
  int gauge_stride = 1;
  bool fields = true;
};

/// Displacement of the bed (and of the free surface above it) applied once at `time`.
struct SourceConfig {
  enum class Type { gaussian, file };
  Type type = Type::gaussian;
  double time = 0.0;
  double amplitude = 0.0;
  Vec2 center;
  double sigma = 1.0;
  std::string file;
};

struct CaseRef {
  std::string name;
  CaseParams params;
};

struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::string mesh_file;
  LayerConfig layers;
  double g = default_gravity;
  double h_dry = default_h_dry;
  RheologyParams rheology;
  StepControl control;
  int threads = 1;
  std::map<std::string, BoundaryEntry> boundaries;
  InitialCondition initial;
  std::optional<CaseRef> analytic;
  std::vector<Gauge> gauges;
  OutputConfig output;
  std::optional<SourceConfig> source;
  Field error_field = Field::h;

  std::filesystem::path resolve(const std::string &p) const {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base_dir / q;
  }
};

namespace detail {

using boost::property_tree::ptree;

struct Section {
  std::string name;
  const ptree *tree = nullptr;

  bool has(const std::string &key) const { return tree->find(key) != tree->not_found(); }

  std::string where(const std::string &key) const { return name + "." + key; }

  std::string str(const std::string &key) const {
    const auto it = tree->find(key);
    if (it == tree->not_found()) throw ConfigError(where(key) + ": missing");
    return it->second.data();
  }
  std::string str(const std::string &key, const std::string &fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string &key) const {
    const std::string s = str(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error &) {
      throw ConfigError(where(key) + ": expected a number, got '" + s + "'");
    }
  }
  double num(const std::string &key, double fallback) const { return has(key) ? num(key) : fallback; }

  int integer(const std::string &key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = num(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(where(key) + ": expected an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string &key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw std::invalid_argument(item);
        const std::string t = item.substr(a, b - a + 1);
        out.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error &) {
        throw ConfigError(where(key) + ": bad list entry '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
    return out;
  }

  TimeSeries series(const std::string &key) const {
    try {
      return TimeSeries::parse(str(key));
    } catch (const ConfigError &e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void only(std::initializer_list<const char *> keys) const {
    for (const auto &kv : *tree) {
      bool ok = false;
      for (const char *k : keys) ok = ok || kv.first == k;
      if (!ok) throw ConfigError(where(kv.first) + ": unknown key");
    }
  }
};

inline BoundaryEntry parse_boundary(const Section &s) {
  BoundaryEntry b;
  b.kind = parse_boundary_kind(s.str("kind"));
  for (const auto &kv : *s.tree) {
    const std::string &k = kv.first;
    const bool layer_key = k.size() > 2 && k.rfind("q_", 0) == 0 && k.find_first_not_of("0123456789", 2) == std::string::npos;
    if (k != "kind" && k != "h" && k != "q" && k != "profile" && !layer_key) throw ConfigError(s.where(k) + ": unknown key");
  }
  const std::string profile = s.str("profile", "uniform");
  if (profile != "uniform" && profile != "per_layer") throw ConfigError(s.where("profile") + ": expected uniform or per_layer");
  switch (b.kind) {
    case BoundaryKind::fluvial_depth:
      b.h = s.series("h");
      break;
    case BoundaryKind::torrential_in:
      b.h = s.series("h");
      [[fallthrough]];
    case BoundaryKind::fluvial_flux:
      if (profile == "per_layer") {
        for (int k = 1; s.has("q_" + std::to_string(k)); ++k) b.q_layers.push_back(s.series("q_" + std::to_string(k)));
        if (b.q_layers.empty()) throw ConfigError(s.where("q_1") + ": per_layer profile needs q_1 .. q_N");
      } else {
        b.q = s.series("q");
      }
      break;
    default:
      break;
  }
  return b;
}

}  // namespace detail

/// Parses an INI run configuration. Paths inside are relative to `base_dir`.
inline RunConfig parse_config(std::istream &in, const std::string &name = "<config>",
                              const std::filesystem::path &base_dir = ".") {
  using detail::Section;
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  boost::property_tree::ptree pt;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  // the INI reader drops sections without keys; recover their names from the text
  std::vector<std::string> order;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      const auto a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos || line[a] != '[') continue;
      const auto b = line.find(']', a);
      if (b != std::string::npos) order.push_back(line.substr(a + 1, b - a - 1));
    }
  }
  for (const auto &kv : pt)
    if (!kv.second.data().empty() || kv.second.empty())
      if (std::find(order.begin(), order.end(), kv.first) == order.end())
        throw ConfigError(name + ": key '" + kv.first + "' outside of a section");
  const boost::property_tree::ptree empty;
  RunConfig c;
  c.base_dir = base_dir;
  bool have_mesh = false, have_time = false;
  std::optional<Section> initial_sec;
  for (const auto &sec_name : order) {
    const auto found = pt.find(sec_name);
    const Section s{sec_name, found == pt.not_found() ? &empty : &found->second};
    const std::string &sec = sec_name;
    if (sec == "mesh") {
      s.only({"file"});
      c.mesh_file = s.str("file");
      have_mesh = true;
    } else if (sec == "layers") {
      s.only({"count", "fractions"});
      if (s.has("fractions")) {
        c.layers.l = s.list("fractions");
        if (s.has("count") && s.integer("count", 0) != c.layers.size())
          throw ConfigError(s.where("count") + ": does not match the number of fractions");
      } else {
        const int n = s.integer("count", 1);
        if (n < 1) throw ConfigError(s.where("count") + ": must be at least 1");
        c.layers = LayerConfig::uniform(n);
      }
      try {
        c.layers.check();
      } catch (const ConfigError &e) {
        throw ConfigError(s.where("fractions") + ": " + e.what());
      }
    } else if (sec == "physics") {
      s.only({"g", "h_dry"});
      c.g = s.num("g", c.g);
      c.h_dry = s.num("h_dry", c.h_dry);
      if (!(c.g > 0.0)) throw ConfigError(s.where("g") + ": must be positive");
      if (!(c.h_dry >= 0.0)) throw ConfigError(s.where("h_dry") + ": must be nonnegative");
    } else if (sec == "rheology") {
      s.only({"nu", "kappa", "W", "ts"});
      c.rheology.nu = s.num("nu", 0.0);
      c.rheology.kappa = s.num("kappa", 0.0);
      c.rheology.W = s.num("W", 0.0);
      if (s.has("ts")) {
        const auto t = s.list("ts");
        if (t.size() != 2) throw ConfigError(s.where("ts") + ": expected two components");
        c.rheology.ts = {t[0], t[1]};
      }
      try {
        c.rheology.check();
      } catch (const ConfigError &e) {
        throw ConfigError(s.where("*") + ": " + e.what());
      }
    } else if (sec == "time") {
      s.only({"t_end", "beta", "dt_max", "order"});
      c.control.t_end = s.num("t_end");
      c.control.beta = s.num("beta", c.control.beta);
      c.control.dt_max = s.num("dt_max", c.control.dt_max);
      c.control.order = s.integer("order", 1);
      if (!(c.control.t_end > 0.0)) throw ConfigError(s.where("t_end") + ": must be positive");
      try {
        c.control.check();
      } catch (const ConfigError &e) {
        throw ConfigError(s.where("*") + ": " + e.what());
      }
      have_time = true;
    } else if (sec == "run") {
      s.only({"threads"});
      c.threads = s.integer("threads", 1);
      if (c.threads < 1) throw ConfigError(s.where("threads") + ": must be at least 1");
    } else if (sec.rfind("boundary.", 0) == 0) {
      const std::string tag = sec.substr(9);
      if (tag.empty()) throw ConfigError(sec + ": empty tag name");
      c.boundaries[tag] = detail::parse_boundary(s);
    } else if (sec == "initial") {
      initial_sec = s;
    } else if (sec.rfind("case.", 0) == 0) {
      if (c.analytic) throw ConfigError(sec + ": only one analytic case may be given");
      std::map<std::string, std::string> kv2;
      for (const auto &p : *s.tree) kv2[p.first] = p.second.data();
      c.analytic = CaseRef{sec.substr(5), CaseParams(kv2)};
      try {
        make_case(c.analytic->name, c.analytic->params);
      } catch (const ConfigError &e) {
        throw ConfigError(sec + ": " + e.what());
      }
    } else if (sec == "gauges") {
      for (const auto &p : *s.tree) {
        const auto xy = s.list(p.first);
        if (xy.size() != 2) throw ConfigError(s.where(p.first) + ": expected x, y");
        c.gauges.push_back({p.first, {xy[0], xy[1]}});
      }
    } else if (sec == "output") {
      s.only({"dir", "epochs", "interval", "gauge_stride", "fields"});
      c.output.dir = s.str("dir", c.output.dir);
      if (s.has("epochs")) c.output.epochs = s.list("epochs");
      c.output.interval = s.num("interval", 0.0);
      c.output.gauge_stride = s.integer("gauge_stride", 1);
      const std::string f = s.str("fields", "true");
      if (f != "true" && f != "false") throw ConfigError(s.where("fields") + ": expected true or false");
      c.output.fields = f == "true";
      if (c.output.interval < 0.0) throw ConfigError(s.where("interval") + ": must be nonnegative");
      if (c.output.gauge_stride < 1) throw ConfigError(s.where("gauge_stride") + ": must be at least 1");
      for (std::size_t k = 1; k < c.output.epochs.size(); ++k)
        if (!(c.output.epochs[k] > c.output.epochs[k - 1])) throw ConfigError(s.where("epochs") + ": must increase");
    } else if (sec == "source") {
      s.only({"type", "time", "amplitude", "x", "y", "sigma", "file"});
      SourceConfig src;
      const std::string type = s.str("type", "gaussian");
      if (type == "gaussian") {
        src.type = SourceConfig::Type::gaussian;
        src.amplitude = s.num("amplitude");
        src.center = {s.num("x", 0.0), s.num("y", 0.0)};
        src.sigma = s.num("sigma");
        if (!(src.sigma > 0.0)) throw ConfigError(s.where("sigma") + ": must be positive");
      } else if (type == "file") {
        src.type = SourceConfig::Type::file;
        src.file = s.str("file");
      } else {
        throw ConfigError(s.where("type") + ": expected gaussian or file");
      }
      src.time = s.num("time", 0.0);
      if (src.time < 0.0) throw ConfigError(s.where("time") + ": must be nonnegative");
      c.source = src;
    } else if (sec == "convergence") {
      s.only({"field"});
      try {
        c.error_field = parse_field(s.str("field", "h"));
      } catch (const ConfigError &e) {
        throw ConfigError(s.where("field") + ": " + e.what());
      }
    } else {
      throw ConfigError(name + ": unknown section [" + sec + "]");
    }
  }
  if (!have_mesh) throw ConfigError(name + ": missing section [mesh]");
  if (!have_time) throw ConfigError(name + ": missing section [time]");

  if (initial_sec) {
    const Section &s = *initial_sec;
    s.only({"type", "level", "u", "v", "file"});
    const std::string type = s.str("type", "lake");
    if (type == "lake") {
      c.initial.type = InitialCondition::Type::lake;
      c.initial.level = s.num("level", 0.0);
      c.initial.u = s.num("u", 0.0);
      c.initial.v = s.num("v", 0.0);
    } else if (type == "case") {
      if (!c.analytic) throw ConfigError(s.where("type") + ": 'case' needs a [case.<name>] section");
      c.initial.type = InitialCondition::Type::analytic;
    } else if (type == "file") {
      c.initial.type = InitialCondition::Type::file;
      c.initial.file = s.str("file");
    } else {
      throw ConfigError(s.where("type") + ": expected lake, case or file");
    }
  }
  for (const auto &[tag, b] : c.boundaries)
    if (b.kind == BoundaryKind::analytic && !c.analytic)
      throw ConfigError("boundary." + tag + ".kind: 'analytic' needs a [case.<name>] section");
  for (const auto &[tag, b] : c.boundaries)
    if (!b.q_layers.empty() && static_cast<int>(b.q_layers.size()) != c.layers.size())
      throw ConfigError("boundary." + tag + ": per_layer profile needs one discharge per layer");
  return c;
}

inline RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace layerflow
