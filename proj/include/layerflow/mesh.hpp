#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace layerflow {

/// Raw input: nodes with bed elevation, CCW triangles, tagged boundary edges.
struct Triangulation {
  struct BoundaryEdge {
    int a = 0;
    int b = 0;
    std::string tag;
  };
  std::vector<Vec2> nodes;
  std::vector<double> zb;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary;
};

/// Dual face shared by cells i < j (one per primal edge); `normal` points from i to j.
struct Edge {
  int i = 0;
  int j = 0;
  double length = 0.0;
  Vec2 normal;
};

/// Cell-local view of a dual face; `normal` is outward from the owning cell.
struct HalfEdge {
  int neighbor = 0;
  int edge = 0;
  double length = 0.0;
  Vec2 normal;
};

/// Half of a boundary triangle edge, from `node` to the edge midpoint.
struct BoundarySegment {
  int node = 0;
  int other = 0;
  double length = 0.0;
  Vec2 normal;
  int tag = 0;
};

/// Boundary flux face of a cell. A corner node whose two segments carry
/// different tags owns two faces.
struct BoundaryFace {
  int node = 0;
  double length = 0.0;
  Vec2 normal;
  int tag = 0;
};

/// Vertex-centred median dual of a triangulation. Immutable after build_dual.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<double> zb;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> tri_area;
  /// Gradients of the three P1 hat functions of each triangle.
  std::vector<std::array<Vec2, 3>> tri_grad;

  std::vector<double> area;
  std::vector<double> perimeter;

  std::vector<Edge> edges;
  std::vector<int> cell_offset;
  std::vector<HalfEdge> half_edges;

  std::vector<BoundarySegment> segments;
  std::vector<BoundaryFace> faces;
  std::vector<int> face_offset;
  /// Per-vertex aggregate boundary length and unit normal (zero for interior vertices).
  std::vector<double> boundary_length;
  std::vector<Vec2> boundary_normal;

  std::vector<std::string> tags;

  /// Triangles incident to each vertex (CSR).
  std::vector<int> node_tri_offset;
  std::vector<int> node_tris;

  std::size_t num_cells() const { return nodes.size(); }
  std::size_t num_edges() const { return edges.size(); }

  struct Range {
    const HalfEdge *b;
    const HalfEdge *e;
    const HalfEdge *begin() const { return b; }
    const HalfEdge *end() const { return e; }
  };
  Range neighbors(std::size_t i) const {
    return {half_edges.data() + cell_offset[i], half_edges.data() + cell_offset[i + 1]};
  }

  struct FaceRange {
    const BoundaryFace *b;
    const BoundaryFace *e;
    const BoundaryFace *begin() const { return b; }
    const BoundaryFace *end() const { return e; }
  };
  FaceRange boundary_faces(std::size_t i) const {
    return {faces.data() + face_offset[i], faces.data() + face_offset[i + 1]};
  }

  bool is_boundary(std::size_t i) const { return face_offset[i + 1] > face_offset[i]; }

  int tag_id(const std::string &name) const {
    auto it = std::find(tags.begin(), tags.end(), name);
    return it == tags.end() ? -1 : static_cast<int>(it - tags.begin());
  }

  double domain_area() const {
    double a = 0.0;
    for (double t : tri_area) a += t;
    return a;
  }
};

inline double signed_area(const Vec2 &a, const Vec2 &b, const Vec2 &c) {
  return 0.5 * cross(b - a, c - a);
}

inline Mesh build_dual(const Triangulation &tri) {
  const int nn = static_cast<int>(tri.nodes.size());
  if (tri.zb.size() != tri.nodes.size())
    throw MeshError("bed elevation count does not match node count");
  if (nn == 0) throw MeshError("triangulation has no nodes");

  Mesh m;
  m.nodes = tri.nodes;
  m.zb = tri.zb;
  m.triangles = tri.triangles;
  m.area.assign(nn, 0.0);

  struct Side {
    int lo, hi, t;
    bool forward;  // triangle traverses lo -> hi
    Vec2 nu;       // dual-face vector contribution, oriented lo -> hi
  };
  std::vector<Side> sides;
  sides.reserve(tri.triangles.size() * 3);

  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto &v = tri.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (v[k] < 0 || v[k] >= nn)
        throw MeshError("triangle " + std::to_string(t) + " references a missing node",
                        static_cast<std::ptrdiff_t>(t));
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex",
                      static_cast<std::ptrdiff_t>(t));
    const Vec2 a = tri.nodes[v[0]], b = tri.nodes[v[1]], c = tri.nodes[v[2]];
    const double ar = signed_area(a, b, c);
    if (!(ar > 0.0))
      throw MeshError("degenerate or clockwise triangle " + std::to_string(t),
                      static_cast<std::ptrdiff_t>(t));
    m.tri_area.push_back(ar);
    // grad of hat function k is the inward-rotated opposite side over 2|T|
    std::array<Vec2, 3> g;
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = tri.nodes[v[(k + 1) % 3]], q = tri.nodes[v[(k + 2) % 3]];
      const Vec2 d = q - p;
      g[k] = Vec2{-d.y, d.x} * (1.0 / (2.0 * ar));
    }
    m.tri_grad.push_back(g);
    for (int k = 0; k < 3; ++k) m.area[v[k]] += ar / 3.0;

    const Vec2 centroid = (a + b + c) * (1.0 / 3.0);
    for (int k = 0; k < 3; ++k) {
      const int p = v[k], q = v[(k + 1) % 3];
      const Vec2 mid = (tri.nodes[p] + tri.nodes[q]) * 0.5;
      const Vec2 nu = right_normal(centroid - mid);  // points from p towards q
      if (p < q)
        sides.push_back({p, q, static_cast<int>(t), true, nu});
      else
        sides.push_back({q, p, static_cast<int>(t), false, -nu});
    }
  }
  std::sort(sides.begin(), sides.end(), [](const Side &x, const Side &y) {
    return std::tie(x.lo, x.hi, x.t) < std::tie(y.lo, y.hi, y.t);
  });

  std::map<std::pair<int, int>, std::size_t> tagged;
  for (std::size_t k = 0; k < tri.boundary.size(); ++k) {
    const auto &be = tri.boundary[k];
    if (be.a < 0 || be.a >= nn || be.b < 0 || be.b >= nn || be.a == be.b)
      throw MeshError("boundary edge " + std::to_string(k) + " has invalid nodes",
                      static_cast<std::ptrdiff_t>(k));
    auto key = std::minmax(be.a, be.b);
    if (!tagged.emplace(std::pair<int, int>(key.first, key.second), k).second)
      throw MeshError("boundary edge " + std::to_string(k) + " listed twice",
                      static_cast<std::ptrdiff_t>(k));
    if (std::find(m.tags.begin(), m.tags.end(), be.tag) == m.tags.end()) m.tags.push_back(be.tag);
  }

  std::vector<int> bdeg(nn, 0);
  std::size_t used_tags = 0;
  for (std::size_t s = 0; s < sides.size();) {
    std::size_t e = s;
    while (e < sides.size() && sides[e].lo == sides[s].lo && sides[e].hi == sides[s].hi) ++e;
    const Side &f = sides[s];
    const auto it = tagged.find({f.lo, f.hi});
    if (e - s > 2)
      throw MeshError("non-manifold edge (" + std::to_string(f.lo) + "," + std::to_string(f.hi) + ")",
                      f.t);
    if (e - s == 2) {
      if (sides[s].forward == sides[s + 1].forward)
        throw MeshError("inconsistently oriented triangles share edge (" + std::to_string(f.lo) + "," +
                            std::to_string(f.hi) + ")",
                        sides[s + 1].t);
      if (it != tagged.end())
        throw MeshError("boundary edge " + std::to_string(it->second) + " is shared by two triangles",
                        static_cast<std::ptrdiff_t>(it->second));
      const Vec2 nu = sides[s].nu + sides[s + 1].nu;
      const double len = norm(nu);
      m.edges.push_back({f.lo, f.hi, len, nu * (1.0 / len)});
    } else {
      if (it == tagged.end())
        throw MeshError("untagged boundary edge (" + std::to_string(f.lo) + "," + std::to_string(f.hi) + ")",
                        f.t);
      ++used_tags;
      const double len = norm(f.nu);
      m.edges.push_back({f.lo, f.hi, len, f.nu * (1.0 / len)});
      const int tag = m.tag_id(tri.boundary[it->second].tag);
      // outward direction: the triangle traverses p -> q counter-clockwise
      const int p = f.forward ? f.lo : f.hi;
      const int q = f.forward ? f.hi : f.lo;
      const Vec2 d = tri.nodes[q] - tri.nodes[p];
      const double half = 0.5 * norm(d);
      const Vec2 n = right_normal(d) * (1.0 / norm(d));
      m.segments.push_back({p, q, half, n, tag});
      m.segments.push_back({q, p, half, n, tag});
      ++bdeg[p];
      ++bdeg[q];
    }
    s = e;
  }
  if (used_tags != tri.boundary.size())
    throw MeshError("a listed boundary edge is not an edge of any triangle");
  for (int i = 0; i < nn; ++i)
    if (bdeg[i] != 0 && bdeg[i] != 2)
      throw MeshError("boundary does not form simple closed loops at node " + std::to_string(i), i);

  // CSR half-edge view, sorted by neighbour index
  std::vector<int> count(nn + 1, 0);
  for (const auto &e : m.edges) {
    ++count[e.i + 1];
    ++count[e.j + 1];
  }
  m.cell_offset.assign(nn + 1, 0);
  for (int i = 0; i < nn; ++i) m.cell_offset[i + 1] = m.cell_offset[i] + count[i + 1];
  m.half_edges.resize(m.cell_offset[nn]);
  std::vector<int> fill(m.cell_offset.begin(), m.cell_offset.end() - 1);
  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    const auto &e = m.edges[k];
    m.half_edges[fill[e.i]++] = {e.j, static_cast<int>(k), e.length, e.normal};
    m.half_edges[fill[e.j]++] = {e.i, static_cast<int>(k), e.length, -e.normal};
  }
  for (int i = 0; i < nn; ++i)
    std::sort(m.half_edges.begin() + m.cell_offset[i], m.half_edges.begin() + m.cell_offset[i + 1],
              [](const HalfEdge &x, const HalfEdge &y) { return x.neighbor < y.neighbor; });

  // boundary faces
  std::sort(m.segments.begin(), m.segments.end(), [](const BoundarySegment &x, const BoundarySegment &y) {
    return std::tie(x.node, x.other) < std::tie(y.node, y.other);
  });
  m.face_offset.assign(nn + 1, 0);
  m.boundary_length.assign(nn, 0.0);
  m.boundary_normal.assign(nn, Vec2{});
  for (std::size_t s = 0; s < m.segments.size(); s += 2) {
    const auto &s1 = m.segments[s];
    const auto &s2 = m.segments[s + 1];
    const int i = s1.node;
    const Vec2 v1 = s1.normal * s1.length, v2 = s2.normal * s2.length;
    const Vec2 sum = v1 + v2;
    const double len = norm(sum);
    if (len <= 1e-12 * (s1.length + s2.length))
      throw MeshError("antiparallel boundary segments at node " + std::to_string(i), i);
    m.boundary_length[i] = len;
    m.boundary_normal[i] = sum * (1.0 / len);
    if (s1.tag == s2.tag) {
      m.faces.push_back({i, len, sum * (1.0 / len), s1.tag});
    } else {
      m.faces.push_back({i, s1.length, s1.normal, s1.tag});
      m.faces.push_back({i, s2.length, s2.normal, s2.tag});
    }
    m.face_offset[i + 1] = static_cast<int>(m.faces.size());
  }
  for (int i = 0; i < nn; ++i) m.face_offset[i + 1] = std::max(m.face_offset[i + 1], m.face_offset[i]);

  m.perimeter.assign(nn, 0.0);
  for (int i = 0; i < nn; ++i) {
    double p = 0.0;
    for (const auto &h : m.neighbors(i)) p += h.length;
    for (const auto &f : m.boundary_faces(i)) p += f.length;
    m.perimeter[i] = p;
    if (m.cell_offset[i + 1] == m.cell_offset[i] && bdeg[i] == 0)
      throw MeshError("node " + std::to_string(i) + " is not part of any triangle", i);
  }

  std::vector<int> tcount(nn + 1, 0);
  for (const auto &t : m.triangles)
    for (int v : t) ++tcount[v + 1];
  m.node_tri_offset.assign(nn + 1, 0);
  for (int i = 0; i < nn; ++i) m.node_tri_offset[i + 1] = m.node_tri_offset[i] + tcount[i + 1];
  m.node_tris.resize(m.node_tri_offset[nn]);
  std::vector<int> tf(m.node_tri_offset.begin(), m.node_tri_offset.end() - 1);
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    for (int v : m.triangles[t]) m.node_tris[tf[v]++] = static_cast<int>(t);
  return m;
}

/// One violated invariant found by validate().
struct Violation {
  std::string kind;
  std::ptrdiff_t index = -1;
  std::string detail;
};

inline std::vector<Violation> validate(const Mesh &m) {
  std::vector<Violation> out;
  const std::size_t nn = m.num_cells();
  auto fmt = [](double x) {
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
  };

  for (std::size_t k = 0; k < m.edges.size(); ++k) {
    const auto &e = m.edges[k];
    if (std::abs(norm(e.normal) - 1.0) > 1e-14)
      out.push_back({"unit-normal", static_cast<std::ptrdiff_t>(k), "|n| = " + fmt(norm(e.normal))});
  }
  for (std::size_t i = 0; i < nn; ++i)
    for (const auto &h : m.neighbors(i)) {
      if (h.neighbor < static_cast<int>(i)) continue;
      const HalfEdge *back = nullptr;
      for (const auto &g : m.neighbors(h.neighbor))
        if (g.neighbor == static_cast<int>(i)) back = &g;
      if (!back) {
        out.push_back({"antisymmetry", h.edge, "missing reverse half-edge"});
        continue;
      }
      if (!(back->normal == -h.normal) || back->length != h.length)
        out.push_back({"antisymmetry", h.edge,
                       "n_ji != -n_ij between cells " + std::to_string(i) + " and " + std::to_string(h.neighbor)});
    }

  double total = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    total += m.area[i];
    if (!(m.area[i] > 0.0)) out.push_back({"positive-area", static_cast<std::ptrdiff_t>(i), fmt(m.area[i])});
  }
  const double dom = m.domain_area();
  if (std::abs(total - dom) > 1e-12 * dom)
    out.push_back({"area-partition", -1, "sum |C_i| = " + fmt(total) + ", domain = " + fmt(dom)});

  for (std::size_t i = 0; i < nn; ++i) {
    Vec2 s{};
    double per = 0.0;
    for (const auto &h : m.neighbors(i)) {
      s += h.normal * h.length;
      per += h.length;
    }
    for (const auto &f : m.boundary_faces(i)) {
      s += f.normal * f.length;
      per += f.length;
    }
    if (norm(s) > 1e-12 * per)
      out.push_back({"closed-polygon", static_cast<std::ptrdiff_t>(i), "|sum L n| = " + fmt(norm(s))});
    if (!m.is_boundary(i) && m.boundary_length[i] != 0.0)
      out.push_back({"interior-boundary-length", static_cast<std::ptrdiff_t>(i), fmt(m.boundary_length[i])});
  }
  return out;
}

/// Green-Gauss gradient over dual cell i of the P1 interpolant of nodal values.
/// Equals the contour integral of the interpolant along the dual boundary, hence
/// exact for linear fields.
template <class F>
Vec2 dual_gradient(const Mesh &m, std::size_t i, F &&value) {
  Vec2 g{};
  for (int k = m.node_tri_offset[i]; k < m.node_tri_offset[i + 1]; ++k) {
    const int t = m.node_tris[k];
    const auto &v = m.triangles[t];
    Vec2 gt{};
    for (int a = 0; a < 3; ++a) gt += m.tri_grad[t][a] * value(v[a]);
    g += gt * (m.tri_area[t] / 3.0);
  }
  return g * (1.0 / m.area[i]);
}

// ---------------------------------------------------------------------------
// ASCII mesh file

inline Triangulation read_triangulation(std::istream &in, const std::string &name = "<mesh>") {
  Triangulation t;
  std::string line;
  int lineno = 0;
  auto next = [&](const char *what) {
    while (std::getline(in, line)) {
      ++lineno;
      const auto p = line.find_first_not_of(" \t\r");
      if (p == std::string::npos || line[p] == '#') continue;
      return;
    }
    throw MeshError(name + ": unexpected end of file, expected " + what);
  };
  auto fail = [&](const std::string &msg) -> MeshError {
    return MeshError(name + ":" + std::to_string(lineno) + ": " + msg, lineno);
  };
  auto section = [&](const std::string &key) {
    next(key.c_str());
    std::istringstream s(line);
    std::string k;
    long long n = -1;
    if (!(s >> k >> n) || k != key || n < 0) throw fail("expected '" + key + " <count>'");
    return static_cast<std::size_t>(n);
  };

  next("header");
  {
    std::istringstream s(line);
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "layerflow-mesh" || version != 1)
      throw fail("expected header 'layerflow-mesh 1'");
  }
  const std::size_t nn = section("nodes");
  t.nodes.resize(nn);
  t.zb.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    next("node");
    std::istringstream s(line);
    if (!(s >> t.nodes[i].x >> t.nodes[i].y >> t.zb[i])) throw fail("expected 'x y zb'");
  }
  const std::size_t nt = section("triangles");
  t.triangles.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    next("triangle");
    std::istringstream s(line);
    auto &v = t.triangles[i];
    if (!(s >> v[0] >> v[1] >> v[2])) throw fail("expected 'i j k'");
  }
  const std::size_t nb = section("boundary");
  t.boundary.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    next("boundary edge");
    std::istringstream s(line);
    auto &b = t.boundary[i];
    if (!(s >> b.a >> b.b >> b.tag)) throw fail("expected 'i j tag'");
  }
  return t;
}

inline Triangulation read_triangulation(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw MeshError("cannot open mesh file " + path);
  return read_triangulation(f, path);
}

inline void write_triangulation(std::ostream &out, const Triangulation &t) {
  out << "layerflow-mesh 1\n";
  out << "nodes " << t.nodes.size() << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    out << t.nodes[i].x << ' ' << t.nodes[i].y << ' ' << t.zb[i] << "\n";
  out << "triangles " << t.triangles.size() << "\n";
  for (const auto &v : t.triangles) out << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
  out << "boundary " << t.boundary.size() << "\n";
  for (const auto &b : t.boundary) out << b.a << ' ' << b.b << ' ' << b.tag << "\n";
}

inline void write_triangulation(const std::string &path, const Triangulation &t) {
  std::ofstream f(path);
  if (!f) throw MeshError("cannot write mesh file " + path);
  write_triangulation(f, t);
}

}  // namespace layerflow
