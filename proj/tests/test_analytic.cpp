#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "layerflow/analytic.hpp"
#include "layerflow/mesh_gen.hpp"

using namespace layerflow;

namespace {

// Central-difference divergence of (u, v, w) at a point.
double divergence(const AnalyticCase &c, double t, double x, double y, double z, double e = 1e-5) {
  return (c.u(t, x + e, y, z) - c.u(t, x - e, y, z)) / (2 * e) + (c.v(t, x, y + e, z) - c.v(t, x, y - e, z)) / (2 * e) +
         (c.w(t, x, y, z + e) - c.w(t, x, y, z - e)) / (2 * e);
}

}  // namespace

TEST(Channel, Examples) {
  const auto c = stationary_channel();
  EXPECT_NEAR(c.h(0.0, 10.0, 0.0), 2.0 - 0.5 / (2.0 + (10.0 - 40.0 / 3.0) * (10.0 - 40.0 / 3.0)), 1e-15);
  EXPECT_NEAR(c.h(0.0, 10.0, 0.0), 1.96186, 5e-6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> X(0.0, 20.0);
  for (int k = 0; k < 50; ++k) {
    const double x = X(rng);
    EXPECT_EQ(c.v(0.0, x, 0.3, c.zb(x, 0.3)), 0.0);
    EXPECT_NEAR(c.u(0.0, x, 0.0, c.zb(x, 0.0)), 1.0 / std::sin(c.h(0.0, x, 0.0)), 1e-14);
  }
}

TEST(Channel, IsDivergenceFree) {
  const auto c = stationary_channel();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> X(0.5, 19.5), S(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = X(rng), z = c.zb(x, 0.0) + S(rng) * c.h(0.0, x, 0.0);
    EXPECT_NEAR(divergence(c, 0.0, x, 0.0, z), 0.0, 1e-8);
  }
}

TEST(Channel, WVanishesAtTheFreeSurfaceKinematically) {
  // steady free surface: w = u * d(eta)/dx at z = eta
  const auto c = stationary_channel();
  for (double x : {3.0, 9.0, 14.0}) {
    const double e = 1e-6;
    const auto eta = [&](double xx) { return c.zb(xx, 0.0) + c.h(0.0, xx, 0.0); };
    const double z = eta(x);
    EXPECT_NEAR(c.w(0.0, x, 0.0, z), c.u(0.0, x, 0.0, z) * (eta(x + e) - eta(x - e)) / (2 * e), 1e-7);
  }
}

TEST(Channel, RejectsVanishingSine) {
  ChannelParams p;
  p.beta = std::numbers::pi / 1.9;
  EXPECT_THROW(stationary_channel(p), ConfigError);
}

TEST(Thacker, Examples) {
  const ThackerParams p;
  const auto c = thacker_bowl(p);
  EXPECT_NEAR(c.h(0.0, 0.0, 0.0), -1.0 / (2.0 * 9.81 * (0.3 - 1.0)), 1e-15);
  EXPECT_NEAR(c.h(0.0, 0.0, 0.0), 0.072812, 5e-7);
  EXPECT_NEAR(c.h(0.0, 1e-6, 0.0), c.h(0.0, 0.0, 0.0), 1e-10);  // h varies like r^2 near the centre
  EXPECT_NEAR(p.period(), 0.70925, 5e-6);
  EXPECT_EQ(c.zb(1.0, 2.0), 5.0);
}

TEST(Thacker, IsPeriodic) {
  const ThackerParams p;
  const auto c = thacker_bowl(p);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> X(-0.5, 0.5), T(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double t = T(rng), x = X(rng), y = X(rng);
    EXPECT_NEAR(c.h(t, x, y), c.h(t + p.period(), x, y), 1e-12);
  }
}

TEST(Thacker, DepthMatchesDirectFormulaAwayFromTheCentre) {
  const ThackerParams p;
  const auto c = thacker_bowl(p);
  const double g = p.g, be = p.beta, om = p.omega();
  for (double t : {0.0, 0.1, 0.37}) {
    for (double r : {0.01, 0.05, 0.12, 0.2}) {
      const double z = r * r / (p.gamma * std::cos(om * t) - 1.0);
      const double f = -4.0 * g / (be * be) +
                       2.0 / (be * be) * std::sqrt(4 * g * g + p.c * z + be * be * p.alpha * g * (p.gamma * p.gamma - 1) * z * z);
      EXPECT_NEAR(c.h(t, r, 0.0), std::max(0.0, f / (r * r)), 1e-9);
    }
  }
}

TEST(Thacker, VolumeIsConserved) {
  const ThackerParams p;
  const auto c = thacker_bowl(p);
  // radial integration: V = 2 pi int h r dr on the wet disc
  using G = boost::math::quadrature::gauss<double, 20>;
  auto vol = [&](double t) {
    double rmax = 0.0;
    for (double r = 0.0; r < 2.0; r += 1e-4)
      if (c.h(t, r, 0.0) > 0.0) rmax = r;
    double lo = rmax, hi = rmax + 1e-4;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      (c.h(t, mid, 0.0) > 0.0 ? lo : hi) = mid;
    }
    double v = 0.0;
    const int panels = 40;
    for (int k = 0; k < panels; ++k) {
      const double a = lo * k / panels, b = lo * (k + 1) / panels;
      v += G::integrate([&](double r) { return 2.0 * std::numbers::pi * r * c.h(t, r, 0.0); }, a, b);
    }
    return v;
  };
  const double v0 = vol(0.0), v1 = vol(0.25 * p.period());
  EXPECT_NEAR(v1, v0, 1e-6 * v0);
}

TEST(Thacker, IsDivergenceFree) {
  const ThackerParams p;
  const auto c = thacker_bowl(p);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> X(-0.1, 0.1), S(0.05, 0.95), T(0.0, 0.7);
  for (int k = 0; k < 100; ++k) {
    const double t = T(rng), x = X(rng), y = X(rng);
    const double h = c.h(t, x, y);
    if (h <= 0.0) continue;
    const double z = c.zb(x, y) + S(rng) * h;
    EXPECT_NEAR(divergence(c, t, x, y, z, 1e-6), 0.0, 1e-6);
  }
}

TEST(Thacker, RejectsInvalidParameters) {
  ThackerParams p;
  p.gamma = 1.2;
  EXPECT_THROW(thacker_bowl(p), ConfigError);
  p = {};
  p.c = 1.0;
  EXPECT_THROW(thacker_bowl(p), ConfigError);
}

TEST(Draining, Examples) {
  const auto c = draining_tank();
  EXPECT_EQ(c.h(0.0, 0.3, 0.1), 2.0);
  EXPECT_EQ(c.w(0.4, 1.0, 0.5, c.zb(1.0, 0.5)), 0.0);
  EXPECT_TRUE(c.rheology.inert());
  EXPECT_THROW(draining_tank(DrainingParams{1.0, 1.0}), ConfigError);
}

TEST(Draining, ViscousHooks) {
  DrainingParams p;
  p.nu = 0.01;
  const auto c = draining_tank(p);
  EXPECT_DOUBLE_EQ(c.rheology.W, 0.01 * 2.5 / 2.0);
  EXPECT_TRUE(static_cast<bool>(c.rheology.kappa_field));
  EXPECT_GT(c.rheology.kappa_field(2.0, {0.3, 0.3}), 0.0);
}

TEST(Draining, IsDivergenceFree) {
  const auto c = draining_tank();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> X(-1.0, 1.0), S(0.0, 1.0), T(0.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    const double t = T(rng), x = X(rng), y = X(rng), z = S(rng) * c.h(t, x, y);
    EXPECT_NEAR(divergence(c, t, x, y, z), 0.0, 1e-8);
  }
}

TEST(L2Error, ExactInitialisationAndConstantOffset) {
  RectangleSpec s;
  s.x0 = -1.0;
  s.y0 = -1.0;
  s.nx = s.ny = 10;
  s.jitter = 0.2;
  const auto c = draining_tank();
  const Mesh m = build_dual(rectangle_mesh(s, c.zb));
  State st(m, LayerConfig::uniform(3));
  initialize_from(st, c, 0.2);
  EXPECT_LE(l2_error(st, c, 0.2, Field::h), 1e-13);
  EXPECT_LE(l2_error(st, c, 0.2, Field::eta), 1e-13);
  EXPECT_LE(l2_error(st, c, 0.2, Field::u), 1e-13);  // linear profile: layer mean equals mid-layer value
  for (auto &h : st.h) h += 0.01;
  EXPECT_NEAR(l2_error(st, c, 0.2, Field::h), 0.01 * std::sqrt(4.0), 1e-13);
  EXPECT_EQ(parse_field("v"), Field::v);
  EXPECT_THROW(parse_field("w"), ConfigError);
}

TEST(L2Error, InitialisedThackerBowlHasZeroDepthError) {
  RectangleSpec s;
  s.x0 = s.y0 = -0.5;
  s.x1 = s.y1 = 0.5;
  s.nx = s.ny = 12;
  const auto c = thacker_bowl();
  const Mesh m = build_dual(rectangle_mesh(s, c.zb));
  State st(m, LayerConfig::uniform(2));
  initialize_from(st, c, 0.0);
  EXPECT_EQ(l2_error(st, c, 0.0, Field::h), 0.0);
  for (double h : st.h) EXPECT_GE(h, 0.0);
}

TEST(ConvergenceOrder, RecoversPowerLaws) {
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  std::vector<double> e1, e2;
  for (double h : hs) {
    e1.push_back(3.0 * h);
    e2.push_back(0.7 * h * h);
  }
  EXPECT_NEAR(convergence_order(e1, hs), 1.0, 1e-12);
  EXPECT_NEAR(convergence_order(e2, hs), 2.0, 1e-12);
}

TEST(ConvergenceOrder, RejectsBadInput) {
  EXPECT_THROW(convergence_order({1, 2}, {1, 2}), DomainError);
  EXPECT_THROW(convergence_order({1, 2, 3}, {0.1, 0.3, 0.2}), DomainError);
  EXPECT_THROW(convergence_order({1, 2, 3}, {0.1, 0.2}), DomainError);
  EXPECT_THROW(convergence_order({1, 0, 3}, {0.1, 0.2, 0.3}), DomainError);
}

TEST(MeanEdgeLength, UniformGrid) {
  RectangleSpec s;
  s.nx = s.ny = 4;
  s.diagonals = Diagonals::alternating;
  const Mesh m = build_dual(rectangle_mesh(s));
  // 40 axis edges of 0.25 and 16 diagonals of 0.25 sqrt2
  EXPECT_NEAR(mean_edge_length(m), (40 * 0.25 + 16 * 0.25 * std::sqrt(2.0)) / 56.0, 1e-15);
}
