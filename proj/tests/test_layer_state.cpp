#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "layerflow/layer_state.hpp"
#include "layerflow/mesh_gen.hpp"

using namespace layerflow;

namespace {

Mesh unit_square(int n, const std::function<double(double, double)> &zb = {}, double jitter = 0.2) {
  RectangleSpec s;
  s.nx = s.ny = n;
  s.jitter = jitter;
  s.diagonals = Diagonals::random;
  s.seed = 3;
  return build_dual(rectangle_mesh(s, zb));
}

}  // namespace

TEST(LayerConfig, RejectsBadFractions) {
  EXPECT_THROW(LayerConfig::uniform(0), ConfigError);
  EXPECT_THROW((LayerConfig{{0.5, 0.6}}).check(), ConfigError);
  EXPECT_THROW((LayerConfig{{1.2, -0.2}}).check(), ConfigError);
  EXPECT_THROW((LayerConfig{{}}).check(), ConfigError);
  EXPECT_NO_THROW((LayerConfig{{0.2, 0.3, 0.5}}).check());
  EXPECT_NO_THROW(LayerConfig::uniform(7).check());
}

TEST(LayerHeights, Examples) {
  const Mesh m = unit_square(2);
  State s(m, LayerConfig{{0.5, 0.5}});
  s.h[0] = 2.0;
  EXPECT_EQ(layer_heights(s, 0), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(layer_heights(s, 1), (std::vector<double>{0.0, 0.0}));
  State r(m, LayerConfig{{0.2, 0.3, 0.5}});
  r.h[0] = 1.0;
  EXPECT_EQ(layer_heights(r, 0), (std::vector<double>{0.2, 0.3, 0.5}));
}

TEST(LayerHeights, SumToDepth) {
  const Mesh m = unit_square(2);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int N = 1 + trial % 9;
    std::vector<double> l(N);
    double sum = 0.0;
    for (auto &x : l) sum += (x = U(rng));
    for (auto &x : l) x /= sum;
    double s2 = 0.0;
    for (double x : l) s2 += x;
    l.back() += 1.0 - s2;
    State s(m, LayerConfig{l});
    s.h[0] = 10.0 * U(rng);
    double tot = 0.0;
    for (double x : layer_heights(s, 0)) tot += x;
    EXPECT_NEAR(tot, s.h[0], 1e-14 * s.h[0] * N);
  }
}

TEST(Velocities, Examples) {
  const Mesh m = unit_square(2);
  State s(m, LayerConfig{});
  s.h[0] = 1.0;
  s.qx[0] = 2.0;
  EXPECT_EQ(velocities(s, 0).first[0], 2.0);
  s.h[1] = 1e-12;
  EXPECT_EQ(velocities(s, 1).first[0], 0.0);
  State r(m, LayerConfig{{0.25, 0.75}});
  r.h[0] = 4.0;
  r.qx[0] = 1.0;
  r.qx[1] = 3.0;
  const auto [u, v] = velocities(r, 0);
  EXPECT_EQ(u, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(v, (std::vector<double>{0.0, 0.0}));
}

TEST(Velocities, InvertMomentaOnWetCells) {
  const Mesh m = unit_square(3);
  State s(m, LayerConfig::uniform(4));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = 0.1 + std::abs(U(rng));
    for (int a = 0; a < 4; ++a) {
      const double ha = s.layers.l[a] * s.h[i];
      const double u = U(rng), v = U(rng);
      s.qx[i * 4 + a] = ha * u;
      s.qy[i * 4 + a] = ha * v;
      EXPECT_NEAR(s.u(i, a), u, 1e-13 * std::abs(u));
      EXPECT_NEAR(s.v(i, a), v, 1e-13 * std::abs(v));
    }
  }
}

TEST(Interfaces, SpanBedToSurface) {
  const Mesh m = unit_square(2, [](double x, double y) { return 0.3 * x - y; });
  State s(m, LayerConfig{{0.2, 0.3, 0.5}});
  s.h[4] = 1.7;
  const auto z = interfaces(s, 4);
  ASSERT_EQ(z.size(), 4u);
  EXPECT_EQ(z.front(), m.zb[4]);
  EXPECT_EQ(z.back(), s.eta(4));
  EXPECT_NEAR(z[1] - z[0], 0.2 * 1.7, 1e-15);
  EXPECT_NEAR(z[2] - z[1], 0.3 * 1.7, 1e-15);
}

TEST(VerticalVelocity, UniformFlowOverFlatBedIsZero) {
  const Mesh m = unit_square(6);
  State s(m, LayerConfig::uniform(3));
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = 1.5;
    for (int a = 0; a < 3; ++a) {
      s.qx[i * 3 + a] = 0.5 * (0.3 + a);
      s.qy[i * 3 + a] = 0.5 * (-0.2 * a);
    }
  }
  for (double w : vertical_velocity(s)) EXPECT_NEAR(w, 0.0, 1e-12);
}

TEST(VerticalVelocity, LinearStretchingOneLayer) {
  const Mesh m = unit_square(6);
  State s(m, LayerConfig{});
  const double a = 0.4, h = 2.0;
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = h;
    s.qx[i] = h * a * m.nodes[i].x;
  }
  const auto w = vertical_velocity(s);
  for (std::size_t i = 0; i < s.cells(); ++i) EXPECT_NEAR(w[i], -0.5 * h * a, 1e-12);
}

TEST(VerticalVelocity, UniformFlowOverSlopeFollowsTheBed) {
  const double b = 0.25, U = 1.5;
  const Mesh m = unit_square(6, [&](double x, double) { return b * x; });
  State s(m, LayerConfig{});
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = 1.0;
    s.qx[i] = U;
  }
  const auto w = vertical_velocity(s);
  for (std::size_t i = 0; i < s.cells(); ++i) EXPECT_NEAR(w[i], U * b, 1e-12);
}

TEST(VerticalVelocity, DryCellsReportZero) {
  const Mesh m = unit_square(4);
  State s(m, LayerConfig::uniform(2));
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = m.nodes[i].x > 0.5 ? 1.0 : 0.0;
    if (s.h[i] > 0.0) s.qx[i * 2] = 0.5 * m.nodes[i].y;
  }
  const auto w = vertical_velocity(s);
  for (std::size_t i = 0; i < s.cells(); ++i)
    if (s.h[i] == 0.0) {
      EXPECT_EQ(w[i * 2] + w[i * 2 + 1], 0.0);
    }
}

TEST(Energy, Examples) {
  const Mesh m = unit_square(2);
  State s(m, LayerConfig{}, 9.81);
  s.h[0] = 1.0;
  EXPECT_NEAR(energy(s).density[0], 4.905, 1e-14);
  s.qx[0] = 3.0;
  s.qy[0] = 4.0;
  EXPECT_NEAR(energy(s).density[0], 17.405, 1e-13);
  EXPECT_EQ(energy(s).density[1], 0.0);
  EXPECT_NEAR(energy(s).total, m.area[0] * 17.405, 1e-13);
}

TEST(Energy, InvariantUnderCommonRotation) {
  const Mesh m = unit_square(3, [](double x, double y) { return 0.1 * x * y; });
  State s(m, LayerConfig{{0.3, 0.7}});
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (std::size_t i = 0; i < s.cells(); ++i) {
    s.h[i] = 1.0 + 0.5 * U(rng);
    for (int a = 0; a < 2; ++a) {
      s.qx[i * 2 + a] = U(rng);
      s.qy[i * 2 + a] = U(rng);
    }
  }
  const double e0 = energy(s).total;
  const double c = std::cos(0.77), sn = std::sin(0.77);
  for (std::size_t k = 0; k < s.qx.size(); ++k) {
    const double x = s.qx[k], y = s.qy[k];
    s.qx[k] = c * x - sn * y;
    s.qy[k] = sn * x + c * y;
  }
  EXPECT_NEAR(energy(s).total, e0, 1e-13 * std::abs(e0));
}

TEST(TotalMass, Examples) {
  const Mesh m = unit_square(4);
  State s(m, LayerConfig{});
  EXPECT_EQ(total_mass(s), 0.0);
  for (auto &h : s.h) h = 1.0;
  EXPECT_NEAR(total_mass(s), 1.0, 1e-14);
  for (auto &h : s.h) h = 0.0;
  s.h[7] = 2.0;
  EXPECT_EQ(total_mass(s), 2.0 * m.area[7]);
}
