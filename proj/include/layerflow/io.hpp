#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "layer_state.hpp"
#include "mesh.hpp"

namespace layerflow {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::ofstream open_output(const std::filesystem::path &p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << std::setprecision(17);
  return out;
}

/// Legacy ASCII VTK snapshot of the triangulation with point data.
inline void write_vtk(std::ostream &out, const State &s) {
  const Mesh &m = *s.mesh;
  const int N = s.N();
  const std::size_t n = m.num_cells();
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\nlayerflow t=" << s.t << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "FIELD FieldData 2\nTIME 1 1 double\n" << s.t << "\nLAYERS 1 " << N << " double\n";
  for (int a = 0; a < N; ++a) out << s.layers.l[a] << (a + 1 < N ? ' ' : '\n');
  out << "POINTS " << n << " double\n";
  for (const auto &p : m.nodes) out << p.x << ' ' << p.y << " 0\n";
  out << "CELLS " << m.triangles.size() << ' ' << 4 * m.triangles.size() << '\n';
  for (const auto &t : m.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << m.triangles.size() << '\n';
  for (std::size_t k = 0; k < m.triangles.size(); ++k) out << "5\n";
  out << "POINT_DATA " << n << '\n';
  auto scalar = [&](const std::string &name, auto &&f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) out << f(i) << '\n';
  };
  scalar("h", [&](std::size_t i) { return s.h[i]; });
  scalar("eta", [&](std::size_t i) { return s.eta(i); });
  scalar("zb", [&](std::size_t i) { return m.zb[i]; });
  const auto w = vertical_velocity(s);
  for (int a = 0; a < N; ++a) {
    const std::string k = std::to_string(a + 1);
    scalar("u_" + k, [&](std::size_t i) { return s.u(i, a); });
    scalar("v_" + k, [&](std::size_t i) { return s.v(i, a); });
    scalar("w_" + k, [&](std::size_t i) { return w[i * N + a]; });
  }
}

inline void write_vtk(const std::filesystem::path &p, const State &s) {
  auto out = open_output(p);
  write_vtk(out, s);
  if (!out) throw IoError("failed writing '" + p.string() + "'");
}

/// Point data read back from a VTK snapshot.
struct FieldFile {
  double t = 0.0;
  std::vector<double> layers;
  std::vector<Vec2> nodes;
  std::map<std::string, std::vector<double>> scalars;
};

inline FieldFile read_vtk(std::istream &in, const std::string &name = "<fields>") {
  FieldFile f;
  std::string tok;
  auto fail = [&](const std::string &msg) { return IoError(name + ": " + msg); };
  auto need = [&](auto &v) {
    if (!(in >> v)) throw fail("unexpected end of file or bad number");
  };
  std::string header;
  std::getline(in, header);
  if (header.rfind("# vtk DataFile", 0) != 0) throw fail("not a legacy VTK file");
  std::getline(in, header);
  std::size_t npoints = 0;
  while (in >> tok) {
    if (tok == "TIME") {
      int a, b;
      std::string type;
      need(a);
      need(b);
      need(type);
      need(f.t);
    } else if (tok == "LAYERS") {
      int a, n;
      std::string type;
      need(a);
      need(n);
      need(type);
      f.layers.resize(n);
      for (auto &x : f.layers) need(x);
    } else if (tok == "POINTS") {
      std::string type;
      need(npoints);
      need(type);
      f.nodes.resize(npoints);
      for (auto &p : f.nodes) {
        double z;
        need(p.x);
        need(p.y);
        need(z);
      }
    } else if (tok == "SCALARS") {
      std::string nm, type, lt, deflt;
      int comps;
      need(nm);
      need(type);
      need(comps);
      need(lt);
      need(deflt);
      if (lt != "LOOKUP_TABLE") throw fail("expected LOOKUP_TABLE after SCALARS " + nm);
      auto &v = f.scalars[nm];
      v.resize(npoints);
      for (auto &x : v) need(x);
    }
  }
  if (f.nodes.empty()) throw fail("no POINTS section");
  return f;
}

inline FieldFile read_vtk(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open field file '" + p.string() + "'");
  return read_vtk(in, p.string());
}

/// Loads depth and layer velocities of a snapshot into a state on the same mesh.
inline void assign_fields(State &s, const FieldFile &f, const std::string &name = "<fields>") {
  const int N = s.N();
  if (f.nodes.size() != s.cells())
    throw ConfigError(name + ": field file has " + std::to_string(f.nodes.size()) + " points, mesh has " +
                      std::to_string(s.cells()));
  for (std::size_t i = 0; i < s.cells(); ++i)
    if (norm(f.nodes[i] - s.mesh->nodes[i]) > 1e-9 * (1.0 + norm(s.mesh->nodes[i])))
      throw ConfigError(name + ": point " + std::to_string(i) + " does not match the mesh");
  auto get = [&](const std::string &k) -> const std::vector<double> & {
    const auto it = f.scalars.find(k);
    if (it == f.scalars.end()) throw ConfigError(name + ": missing field '" + k + "'");
    return it->second;
  };
  const auto &h = get("h");
  for (std::size_t i = 0; i < s.cells(); ++i) {
    if (!(h[i] >= 0.0)) throw ConfigError(name + ": negative depth at point " + std::to_string(i));
    s.h[i] = h[i];
  }
  for (int a = 0; a < N; ++a) {
    const auto &u = get("u_" + std::to_string(a + 1));
    const auto &v = get("v_" + std::to_string(a + 1));
    for (std::size_t i = 0; i < s.cells(); ++i) {
      const double ha = s.layers.l[a] * s.h[i];
      s.qx[i * N + a] = ha * u[i];
      s.qy[i * N + a] = ha * v[i];
    }
  }
  if (f.scalars.count("u_" + std::to_string(N + 1)))
    throw ConfigError(name + ": field file has more layers than configured");
  s.t = f.t;
}

/// Dual cell holding point p: the vertex with the largest barycentric weight in the containing triangle.
inline int locate_cell(const Mesh &m, Vec2 p) {
  const double tol = 1e-12;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto &T = m.triangles[t];
    const Vec2 a = m.nodes[T[0]], b = m.nodes[T[1]], c = m.nodes[T[2]];
    const double A = signed_area(a, b, c);
    const double l0 = signed_area(p, b, c) / A, l1 = signed_area(a, p, c) / A, l2 = signed_area(a, b, p) / A;
    if (l0 < -tol || l1 < -tol || l2 < -tol) continue;
    if (l0 >= l1 && l0 >= l2) return T[0];
    return l1 >= l2 ? T[1] : T[2];
  }
  return -1;
}

/// Probe time series `t,h,eta,u_1..u_N,v_1..v_N` sampled at one dual cell.
class GaugeWriter {
 public:
  GaugeWriter(const std::filesystem::path &p, int cell, int N) : out_(open_output(p)), cell_(cell), N_(N), path_(p) {
    out_ << "t,h,eta";
    for (int a = 1; a <= N; ++a) out_ << ",u_" << a;
    for (int a = 1; a <= N; ++a) out_ << ",v_" << a;
    out_ << '\n';
  }

  void sample(const State &s) {
    const auto i = static_cast<std::size_t>(cell_);
    const bool wet = s.h[i] > s.h_dry;
    out_ << s.t << ',' << (wet ? s.h[i] : 0.0) << ',' << s.mesh->zb[i] + (wet ? s.h[i] : 0.0);
    for (int a = 0; a < N_; ++a) out_ << ',' << s.u(i, a);
    for (int a = 0; a < N_; ++a) out_ << ',' << s.v(i, a);
    out_ << '\n';
    if (!out_) throw IoError("failed writing '" + path_.string() + "'");
  }

  int cell() const { return cell_; }

 private:
  std::ofstream out_;
  int cell_;
  int N_;
  std::filesystem::path path_;
};

}  // namespace layerflow
