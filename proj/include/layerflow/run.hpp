#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "config.hpp"
#include "integrator.hpp"
#include "io.hpp"
#include "mesh.hpp"

namespace layerflow {

/// Mesh, reference solution, solver and state assembled from a run configuration.
/// Holds references into itself, so it is neither copied nor moved.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg) : cfg_(std::move(cfg)) {
    const auto mesh_path = cfg_.resolve(cfg_.mesh_file);
    mesh_ = build_dual(read_triangulation(mesh_path.string()));
    for (const auto &tag : mesh_.tags)
      if (!cfg_.boundaries.count(tag)) throw ConfigError("missing boundary condition for tag '" + tag + "'");
    for (const auto &[tag, b] : cfg_.boundaries) {
      (void)b;
      if (std::find(mesh_.tags.begin(), mesh_.tags.end(), tag) == mesh_.tags.end())
        throw ConfigError("boundary." + tag + ": tag does not occur in mesh '" + mesh_path.string() + "'");
    }
    if (cfg_.analytic) reference_ = make_case(cfg_.analytic->name, cfg_.analytic->params);

    SolverOptions opt;
    opt.control = cfg_.control;
    opt.threads = cfg_.threads;
    opt.rheology = cfg_.rheology;
    if (reference_ && opt.rheology.inert()) opt.rheology = reference_->rheology;
    const std::vector<double> l = cfg_.layers.l;
    for (const auto &tag : mesh_.tags) {
      const BoundaryEntry &e = cfg_.boundaries.at(tag);
      BoundarySpec b;
      b.kind = e.kind;
      b.h = e.h;
      b.q = e.q;
      b.q_layers = e.q_layers;
      if (e.kind == BoundaryKind::analytic) {
        const AnalyticCase ref = *reference_;
        b.data = [ref, l](double t, Vec2 x) { return boundary_data(ref, l, t, x); };
      }
      opt.boundaries.push_back(std::move(b));
    }
    solver_ = std::make_unique<Solver>(mesh_, std::move(opt));

    state_ = State(mesh_, cfg_.layers, cfg_.g);
    state_.h_dry = cfg_.h_dry;
    const int N = state_.N();
    switch (cfg_.initial.type) {
      case InitialCondition::Type::lake:
        for (std::size_t i = 0; i < state_.cells(); ++i) {
          state_.h[i] = std::max(cfg_.initial.level - mesh_.zb[i], 0.0);
          for (int a = 0; a < N; ++a) {
            state_.qx[i * N + a] = l[a] * state_.h[i] * cfg_.initial.u;
            state_.qy[i * N + a] = l[a] * state_.h[i] * cfg_.initial.v;
          }
        }
        break;
      case InitialCondition::Type::analytic:
        initialize_from(state_, *reference_, 0.0);
        break;
      case InitialCondition::Type::file: {
        const auto p = cfg_.resolve(cfg_.initial.file);
        assign_fields(state_, read_vtk(p), p.string());
        break;
      }
    }
    for (const auto &gauge : cfg_.gauges) {
      const int c = locate_cell(mesh_, gauge.x);
      if (c < 0)
        throw ConfigError("gauges." + gauge.name + ": point (" + std::to_string(gauge.x.x) + ", " +
                          std::to_string(gauge.x.y) + ") lies outside the mesh");
      gauge_cells_.push_back(c);
    }
  }

  Simulation(const Simulation &) = delete;
  Simulation &operator=(const Simulation &) = delete;

  const RunConfig &config() const { return cfg_; }
  const Mesh &mesh() const { return mesh_; }
  State &state() { return state_; }
  const State &state() const { return state_; }
  Solver &solver() { return *solver_; }
  const std::optional<AnalyticCase> &reference() const { return reference_; }
  const std::vector<int> &gauge_cells() const { return gauge_cells_; }

  /// Bed displacement of the configured source at every node.
  std::vector<double> source_displacement() const {
    const SourceConfig &src = *cfg_.source;
    std::vector<double> d(mesh_.num_cells(), 0.0);
    if (src.type == SourceConfig::Type::gaussian) {
      for (std::size_t i = 0; i < d.size(); ++i) {
        const Vec2 r = mesh_.nodes[i] - src.center;
        d[i] = src.amplitude * std::exp(-dot(r, r) / (2.0 * src.sigma * src.sigma));
      }
    } else {
      const auto p = cfg_.resolve(src.file);
      const FieldFile f = read_vtk(p);
      const auto it = f.scalars.find("dzb");
      if (it == f.scalars.end()) throw ConfigError(p.string() + ": source file needs a 'dzb' field");
      if (it->second.size() != d.size()) throw ConfigError(p.string() + ": source file does not match the mesh");
      d = it->second;
    }
    return d;
  }

  /// Raises bed and free surface together; depths and momenta are unchanged.
  void apply_source() {
    const auto d = source_displacement();
    for (std::size_t i = 0; i < d.size(); ++i) mesh_.zb[i] += d[i];
  }

 private:
  RunConfig cfg_;
  Mesh mesh_;
  std::optional<AnalyticCase> reference_;
  std::unique_ptr<Solver> solver_;
  State state_;
  std::vector<int> gauge_cells_;
};

struct RunSummary {
  long steps = 0;
  double t_end = 0.0;
  double dt_min = std::numeric_limits<double>::infinity();
  double dt_max = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double energy_final = 0.0;
  double min_h = std::numeric_limits<double>::infinity();
  double max_surface_deviation = 0.0;
  /// L2 norm of dh/dt over the last step.
  double steady_residual = 0.0;
  BoundaryDiagnostics diagnostics;
  std::optional<double> error_h, error_eta, error_u, error_v;
  double wall_seconds = 0.0;

  double relative_mass_drift() const {
    return mass_initial != 0.0 ? (mass_final - mass_initial) / mass_initial : mass_final - mass_initial;
  }
};

struct RunOptions {
  bool write = true;
  std::optional<std::filesystem::path> output_dir;
};

/// Epochs at which fields are written.
inline std::vector<double> output_epochs(const OutputConfig &o, double t0, double t_end) {
  std::vector<double> e;
  if (!o.epochs.empty()) {
    for (double x : o.epochs)
      if (x >= t0 && x <= t_end) e.push_back(x);
  } else if (o.interval > 0.0) {
    for (long k = 0;; ++k) {
      const double x = t0 + k * o.interval;
      if (x > t_end * (1.0 + 1e-14)) break;
      e.push_back(std::min(x, t_end));
    }
    if (e.back() < t_end) e.push_back(t_end);
  } else {
    e = {t0, t_end};
  }
  return e;
}

namespace detail {

inline double max_surface_deviation(const State &s, const std::vector<double> &eta0) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.cells(); ++i)
    if (s.h[i] > s.h_dry) m = std::max(m, std::abs(s.eta(i) - eta0[i]));
  return m;
}

inline void write_summary_text(const std::filesystem::path &p, const RunSummary &r) {
  auto out = open_output(p);
  out << "steps = " << r.steps << "\nt_end = " << r.t_end << "\ndt_min = " << r.dt_min << "\ndt_max = " << r.dt_max
      << "\nmass_initial = " << r.mass_initial << "\nmass_final = " << r.mass_final
      << "\nrelative_mass_drift = " << r.relative_mass_drift() << "\nenergy_final = " << r.energy_final
      << "\nmin_h = " << r.min_h << "\nmax_surface_deviation = " << r.max_surface_deviation
      << "\nsteady_residual = " << r.steady_residual
      << "\ndepth_given_torrential_out = " << r.diagnostics.depth_given_torrential_out
      << "\ndepth_given_missing_condition = " << r.diagnostics.depth_given_missing_condition
      << "\ntorrential_in_not_inflow = " << r.diagnostics.torrential_in_not_inflow
      << "\nflux_given_unsolvable = " << r.diagnostics.flux_given_unsolvable
      << "\nnewton_iterations = " << r.diagnostics.newton_iterations << '\n';
  if (r.error_h) out << "l2_error_h = " << *r.error_h << '\n';
  if (r.error_eta) out << "l2_error_eta = " << *r.error_eta << '\n';
  if (r.error_u) out << "l2_error_u = " << *r.error_u << '\n';
  if (r.error_v) out << "l2_error_v = " << *r.error_v << '\n';
  out << "wall_seconds = " << r.wall_seconds << '\n';
}

}  // namespace detail

/// Runs a prepared simulation to t_end, writing outputs when requested.
inline RunSummary run(Simulation &sim, const RunOptions &opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig &cfg = sim.config();
  State &s = sim.state();
  Solver &solver = sim.solver();
  const double t_end = cfg.control.t_end;
  if (!(t_end > s.t)) throw ConfigError("time.t_end: must exceed the initial time " + std::to_string(s.t));

  const std::filesystem::path dir = opt.output_dir ? *opt.output_dir : cfg.resolve(cfg.output.dir);
  std::optional<std::ofstream> csv;
  std::vector<GaugeWriter> gauges;
  if (opt.write) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    csv = open_output(dir / "summary.csv");
    *csv << "step,t,dt,mass,energy,min_h,max_surface_deviation\n";
    gauges.reserve(cfg.gauges.size());
    for (std::size_t k = 0; k < cfg.gauges.size(); ++k)
      gauges.emplace_back(dir / ("gauge_" + cfg.gauges[k].name + ".csv"), sim.gauge_cells()[k], s.N());
  }
  const std::vector<double> epochs = cfg.output.fields ? output_epochs(cfg.output, s.t, t_end) : std::vector<double>{};
  std::size_t next_epoch = 0;
  int snapshot = 0;
  auto write_due_epochs = [&] {
    while (next_epoch < epochs.size() && epochs[next_epoch] <= s.t) {
      if (opt.write) {
        char name[32];
        std::snprintf(name, sizeof name, "fields_%04d.vtk", snapshot++);
        write_vtk(dir / name, s);
      }
      ++next_epoch;
    }
  };

  bool source_pending = cfg.source.has_value();
  auto apply_due_source = [&] {
    if (source_pending && cfg.source->time <= s.t) {
      sim.apply_source();
      source_pending = false;
    }
  };

  RunSummary r;
  apply_due_source();
  std::vector<double> eta0(s.cells());
  for (std::size_t i = 0; i < s.cells(); ++i) eta0[i] = s.eta(i);
  r.mass_initial = total_mass(s);
  for (double h : s.h) r.min_h = std::min(r.min_h, h);
  auto record = [&](double dt) {
    if (!csv) return;
    const double mass = total_mass(s), en = energy(s).total;
    double mh = std::numeric_limits<double>::infinity();
    for (double h : s.h) mh = std::min(mh, h);
    *csv << r.steps << ',' << s.t << ',' << dt << ',' << mass << ',' << en << ',' << mh << ','
         << detail::max_surface_deviation(s, eta0) << '\n';
  };
  record(0.0);
  for (auto &gw : gauges) gw.sample(s);
  write_due_epochs();

  std::vector<double> h_prev;
  while (s.t < t_end) {
    double target = t_end;
    if (next_epoch < epochs.size()) target = std::min(target, epochs[next_epoch]);
    if (source_pending) target = std::min(target, cfg.source->time);
    h_prev = s.h;
    const double dt = solver.step(s, target);
    ++r.steps;
    r.dt_min = std::min(r.dt_min, dt);
    r.dt_max = std::max(r.dt_max, dt);
    for (double h : s.h) r.min_h = std::min(r.min_h, h);
    r.max_surface_deviation = std::max(r.max_surface_deviation, detail::max_surface_deviation(s, eta0));
    if (dt > 0.0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < s.cells(); ++i) {
        const double d = (s.h[i] - h_prev[i]) / dt;
        sum += sim.mesh().area[i] * d * d;
      }
      r.steady_residual = std::sqrt(sum);
    }
    record(dt);
    if (r.steps % cfg.output.gauge_stride == 0 || s.t >= t_end)
      for (auto &gw : gauges) gw.sample(s);
    write_due_epochs();
    apply_due_source();
  }

  r.t_end = s.t;
  r.mass_final = total_mass(s);
  r.energy_final = energy(s).total;
  r.diagnostics = solver.diagnostics;
  if (const auto &ref = sim.reference()) {
    r.error_h = l2_error(s, *ref, s.t, Field::h);
    r.error_eta = l2_error(s, *ref, s.t, Field::eta);
    r.error_u = l2_error(s, *ref, s.t, Field::u);
    r.error_v = l2_error(s, *ref, s.t, Field::v);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (opt.write) detail::write_summary_text(dir / "summary.txt", r);
  return r;
}

inline RunSummary run(const RunConfig &cfg, const RunOptions &opt = {}) {
  Simulation sim(cfg);
  return run(sim, opt);
}

struct ConvergenceRow {
  std::string mesh;
  std::size_t nodes = 0;
  int layers = 0;
  double size = 0.0;
  double error = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double order = std::numeric_limits<double>::quiet_NaN();
};

/// Runs the configured analytic case on each mesh and fits the error decay.
/// The table written so far is kept in `csv_path` if a run fails.
inline ConvergenceTable convergence(const RunConfig &base, const std::vector<std::string> &meshes,
                                    const std::vector<int> &layers, const std::filesystem::path &csv_path) {
  if (meshes.size() < 3) throw ConfigError("convergence needs at least three meshes");
  if (!layers.empty() && layers.size() != meshes.size())
    throw ConfigError("convergence needs one layer count per mesh");
  if (!base.analytic) throw ConfigError("convergence needs a [case.<name>] section");
  ConvergenceTable table;
  auto out = open_output(csv_path);
  out << "mesh,nodes,layers,size,error,order\n";
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    RunConfig cfg = base;
    cfg.mesh_file = std::filesystem::absolute(meshes[k]).string();
    if (!layers.empty()) {
      if (layers[k] < 1) throw ConfigError("layer counts must be at least 1");
      cfg.layers = LayerConfig::uniform(layers[k]);
      for (auto &[tag, b] : cfg.boundaries)
        if (!b.q_layers.empty()) throw ConfigError("boundary." + tag + ": per_layer profile cannot follow a layer sweep");
    }
    Simulation sim(cfg);
    RunOptions opt;
    opt.write = false;
    run(sim, opt);
    ConvergenceRow row{meshes[k], sim.mesh().num_cells(), sim.state().N(), mean_edge_length(sim.mesh()),
                       l2_error(sim.state(), *sim.reference(), sim.state().t, cfg.error_field)};
    out << row.mesh << ',' << row.nodes << ',' << row.layers << ',' << row.size << ',' << row.error << ',';
    if (!table.rows.empty()) {
      const auto &p = table.rows.back();
      out << std::log(p.error / row.error) / std::log(p.size / row.size);
    }
    out << '\n' << std::flush;
    table.rows.push_back(row);
  }
  std::vector<double> e, h;
  for (const auto &r : table.rows) {
    e.push_back(r.error);
    h.push_back(r.size);
  }
  table.order = convergence_order(e, h);
  out << "fit,,,,," << table.order << '\n';
  return table;
}

}  // namespace layerflow
