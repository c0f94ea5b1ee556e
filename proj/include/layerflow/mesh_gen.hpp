#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "mesh.hpp"

namespace layerflow {

enum class Diagonals { alternating, random, union_jack };

/// Structured-then-perturbed triangulation of a rectangle.
struct RectangleSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 10, ny = 10;
  Diagonals diagonals = Diagonals::alternating;
  /// Interior node displacement as a fraction of the local spacing.
  double jitter = 0.0;
  std::uint64_t seed = 1;
  /// Boundary tags for the bottom, right, top and left sides.
  std::array<std::string, 4> tags{"wall", "wall", "wall", "wall"};
};

inline Triangulation rectangle_mesh(const RectangleSpec &s,
                                    const std::function<double(double, double)> &zb = {}) {
  if (s.nx < 1 || s.ny < 1 || !(s.x1 > s.x0) || !(s.y1 > s.y0))
    throw ConfigError("rectangle mesh needs nx, ny >= 1 and a non-empty box");
  if (s.jitter < 0.0 || s.jitter >= 0.3) throw ConfigError("jitter must lie in [0, 0.3)");
  Triangulation t;
  const double dx = (s.x1 - s.x0) / s.nx, dy = (s.y1 - s.y0) / s.ny;
  auto id = [&](int i, int j) { return j * (s.nx + 1) + i; };
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);

  for (int j = 0; j <= s.ny; ++j)
    for (int i = 0; i <= s.nx; ++i) {
      double x = s.x0 + i * dx, y = s.y0 + j * dy;
      if (i == s.nx) x = s.x1;
      if (j == s.ny) y = s.y1;
      if (s.jitter > 0.0) {
        const double ux = U(rng), uy = U(rng);
        if (i > 0 && i < s.nx) x += s.jitter * dx * ux;
        if (j > 0 && j < s.ny) y += s.jitter * dy * uy;
      }
      t.nodes.push_back({x, y});
      t.zb.push_back(zb ? zb(x, y) : 0.0);
    }

  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j < s.ny; ++j)
    for (int i = 0; i < s.nx; ++i) {
      bool slash = true;  // diagonal from (i,j) to (i+1,j+1)
      switch (s.diagonals) {
        case Diagonals::alternating: slash = (i + j) % 2 == 0; break;
        case Diagonals::random: slash = coin(rng); break;
        case Diagonals::union_jack: slash = (2 * i < s.nx) == (2 * j < s.ny); break;
      }
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (slash) {
        t.triangles.push_back({a, b, c});
        t.triangles.push_back({a, c, d});
      } else {
        t.triangles.push_back({a, b, d});
        t.triangles.push_back({b, c, d});
      }
    }

  for (int i = 0; i < s.nx; ++i) t.boundary.push_back({id(i, 0), id(i + 1, 0), s.tags[0]});
  for (int j = 0; j < s.ny; ++j) t.boundary.push_back({id(s.nx, j), id(s.nx, j + 1), s.tags[1]});
  for (int i = s.nx; i > 0; --i) t.boundary.push_back({id(i, s.ny), id(i - 1, s.ny), s.tags[2]});
  for (int j = s.ny; j > 0; --j) t.boundary.push_back({id(0, j), id(0, j - 1), s.tags[3]});
  return t;
}

}  // namespace layerflow
