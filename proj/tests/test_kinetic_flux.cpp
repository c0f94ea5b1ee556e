#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "layerflow/kinetic_flux.hpp"
#include "layerflow/kinetic_quadrature.hpp"

using namespace layerflow;

namespace {

constexpr double g = 9.81;
constexpr double pi = std::numbers::pi;

Vec2 unit(double a) { return {std::cos(a), std::sin(a)}; }

void expect_close(const FluxTriple &a, const FluxTriple &b, double tol) {
  EXPECT_NEAR(a.h, b.h, tol);
  EXPECT_NEAR(a.hu, b.hu, tol);
  EXPECT_NEAR(a.hv, b.hv, tol);
}

}  // namespace

TEST(ChiMarginal, Examples) {
  EXPECT_NEAR(chi_marginal(0.0), 1.0 / pi, 1e-16);
  EXPECT_EQ(chi_marginal(2.0), 0.0);
  EXPECT_EQ(chi_marginal(-2.0), 0.0);
  EXPECT_EQ(chi_marginal(3.0), 0.0);
  EXPECT_EQ(chi_marginal(0.7), chi_marginal(-0.7));
}

TEST(ChiMarginal, IntegratesToOne) {
  const auto r = quadrature::composite(-2.0, 2.0, 40);
  double s = 0.0;
  for (std::size_t k = 0; k < r.x.size(); ++k) s += r.w[k] * chi_marginal(r.x[k]);
  EXPECT_NEAR(s, 1.0, 1e-6);  // square-root endpoint singularity limits the rule
}

TEST(HalfFluxPlus, StillWater) {
  const double c = std::sqrt(0.5 * g);
  const FluxTriple f = half_flux_plus(1.0, 0.0, 0.0, {1.0, 0.0}, g);
  EXPECT_NEAR(f.h, 4.0 * c / (3.0 * pi), 1e-15);
  EXPECT_NEAR(f.h, 0.939958, 5e-7);
  EXPECT_NEAR(f.hu, 2.4525, 1e-14);
  EXPECT_EQ(f.hv, 0.0);
}

TEST(HalfFluxPlus, BranchEndpoints) {
  const FluxTriple z = half_flux_plus(1.0, -10.0, 0.0, {1.0, 0.0}, g);
  EXPECT_EQ(z.h, 0.0);
  EXPECT_EQ(z.hu, 0.0);
  EXPECT_EQ(z.hv, 0.0);
  const FluxTriple f = half_flux_plus(1.0, 10.0, 0.0, {1.0, 0.0}, g);
  EXPECT_NEAR(f.h, 10.0, 1e-14);
  EXPECT_NEAR(f.hu, 104.905, 1e-12);
  EXPECT_EQ(f.hv, 0.0);
}

TEST(HalfFluxPlus, ZeroAndNegativeDepth) {
  const FluxTriple f = half_flux_plus(0.0, 3.0, 1.0, {0.0, 1.0}, g);
  EXPECT_EQ(f.h, 0.0);
  EXPECT_EQ(f.hu, 0.0);
  EXPECT_THROW(half_flux_plus(-1e-3, 0.0, 0.0, {1.0, 0.0}, g), DomainError);
  EXPECT_THROW(half_flux_minus(-1e-3, 0.0, 0.0, {1.0, 0.0}, g), DomainError);
  EXPECT_THROW(flux_total(-1.0, 0.0, 0.0, {1.0, 0.0}, g), DomainError);
}

TEST(HalfFluxPlus, MatchesQuadratureOnRandomStates) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> H(1e-6, 10.0), V(-10.0, 10.0), A(0.0, 2.0 * pi);
  for (int k = 0; k < 60; ++k) {
    const double h = H(rng), u = V(rng), v = V(rng);
    const Vec2 n = unit(A(rng));
    const FluxTriple ref = quadrature::half_flux(h, u, v, n, g, +1, 6);
    const FluxTriple tot = flux_total(h, u, v, n, g);
    const double scale = std::max({1.0, std::abs(tot.h), std::abs(tot.hu), std::abs(tot.hv)});
    expect_close(half_flux_plus(h, u, v, n, g), ref, 1e-8 * scale);
    const FluxTriple refm = quadrature::half_flux(h, u, v, n, g, -1, 6);
    expect_close(half_flux_minus(h, u, v, n, g), refm, 1e-8 * scale);
  }
}

TEST(HalfFluxPlus, ContinuousAtBranchPoints) {
  for (double h : {0.01, 1.0, 7.0})
    for (double sg : {-1.0, 1.0}) {
      const double c = std::sqrt(0.5 * g * h);
      const Vec2 n = unit(0.3);
      const double un = sg * 2.0 * c;
      const double eps = 1e-12 * c;
      const FluxTriple a = half_flux_plus(h, (un - eps) * n.x, (un - eps) * n.y, n, g);
      const FluxTriple b = half_flux_plus(h, (un + eps) * n.x, (un + eps) * n.y, n, g);
      // the eps shift alone moves the flux by about |dF/dun| * 2 eps
      expect_close(a, b, 1e-10 * (1.0 + std::abs(a.hu) + std::abs(a.hv)));
    }
}

TEST(HalfFluxMinus, StillWaterAndSplitting) {
  const double c = std::sqrt(0.5 * g);
  const FluxTriple m = half_flux_minus(1.0, 0.0, 0.0, {1.0, 0.0}, g);
  EXPECT_NEAR(m.h, -4.0 * c / (3.0 * pi), 1e-15);
  EXPECT_NEAR(m.hu, 0.5 * c * c, 1e-14);
  const FluxTriple z = half_flux_minus(1.0, 10.0, 0.0, {1.0, 0.0}, g);
  EXPECT_EQ(z.h, 0.0);
  EXPECT_EQ(z.hu, 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> H(0.0, 5.0), V(-8.0, 8.0), A(0.0, 2.0 * pi);
  for (int k = 0; k < 500; ++k) {
    const double h = H(rng), u = V(rng), v = V(rng);
    const Vec2 n = unit(A(rng));
    const FluxTriple s = half_flux_plus(h, u, v, n, g) + half_flux_minus(h, u, v, n, g);
    const FluxTriple t = flux_total(h, u, v, n, g);
    expect_close(s, t, 1e-13 * std::max(1.0, std::abs(t.hu) + std::abs(t.hv)));
    // mirror identity F-(U, n) = -F+(U, -n)
    expect_close(half_flux_minus(h, u, v, n, g), -half_flux_plus(h, u, v, -n, g), 1e-12 * std::max(1.0, std::abs(t.hu)));
  }
}

TEST(FluxTotal, MassComponentIsExact) {
  const FluxTriple f = flux_total(2.5, 1.5, -0.5, unit(1.1), g);
  EXPECT_EQ(f.h, 2.5 * (1.5 * std::cos(1.1) + -0.5 * std::sin(1.1)));
}

TEST(HalfFluxPlus, RotationEquivariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> H(0.01, 5.0), V(-6.0, 6.0), A(0.0, 2.0 * pi);
  for (int k = 0; k < 300; ++k) {
    const double h = H(rng), u = V(rng), v = V(rng), th = A(rng), r = A(rng);
    const Vec2 n = unit(th);
    const double c = std::cos(r), s = std::sin(r);
    const FluxTriple f = half_flux_plus(h, u, v, n, g);
    const FluxTriple fr = half_flux_plus(h, c * u - s * v, s * u + c * v, unit(th + r), g);
    const double scale = std::max(1.0, std::abs(f.hu) + std::abs(f.hv));
    EXPECT_NEAR(fr.h, f.h, 1e-12 * scale);
    EXPECT_NEAR(fr.hu, c * f.hu - s * f.hv, 1e-12 * scale);
    EXPECT_NEAR(fr.hv, s * f.hu + c * f.hv, 1e-12 * scale);
  }
}

TEST(HrStates, Examples) {
  const HRPair flat = hr_states(1.5, 0.7, 0.2, 0.2);
  EXPECT_EQ(flat.h_ij, 1.5);
  EXPECT_EQ(flat.h_ji, 0.7);
  const HRPair lake = hr_states(2.0, 1.0, 0.0, 1.0);
  EXPECT_EQ(lake.zstar, 1.0);
  EXPECT_EQ(lake.h_ij, 1.0);
  EXPECT_EQ(lake.h_ji, 1.0);
  const HRPair dry = hr_states(0.5, 0.0, 0.0, 1.0);
  EXPECT_EQ(dry.h_ij, 0.0);
}

TEST(HrStates, BoundedByCellDepth) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> H(0.0, 3.0), Z(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const double hi = H(rng), hj = H(rng), zi = Z(rng), zj = Z(rng);
    const HRPair p = hr_states(hi, hj, zi, zj);
    EXPECT_GE(p.h_ij, 0.0);
    EXPECT_GE(p.h_ji, 0.0);
    EXPECT_LE(p.h_ij, hi);
    EXPECT_LE(p.h_ji, hj);
  }
}

TEST(EdgeFlux, LakeAtRestBalancesSource) {
  const std::vector<double> l{0.2, 0.3, 0.5};
  const double u0[3] = {0, 0, 0};
  const Vec2 n = unit(0.4);
  for (double zj : {-0.5, 0.3, 1.9, 2.5}) {
    const double eta = 2.0, zi = 0.0;
    const SideState si{eta - zi, zi, u0, u0}, sj{std::max(eta - zj, 0.0), zj, u0, u0};
    FluxTriple F[3];
    const HRPair p = edge_flux(si, sj, n, l, g, F);
    const Vec2 S = hr_source(p.h_ij, si, si.h, zi, n, g);
    for (int a = 0; a < 3; ++a) {
      // flux minus source equals the cell's own hydrostatic pressure, which cancels around a closed cell
      const double px = F[a].hu - l[a] * S.x, py = F[a].hv - l[a] * S.y;
      EXPECT_NEAR(px, l[a] * 0.5 * g * si.h * si.h * n.x, 1e-13);
      EXPECT_NEAR(py, l[a] * 0.5 * g * si.h * si.h * n.y, 1e-13);
      if (zj < eta) {
        EXPECT_NEAR(F[a].h, 0.0, 1e-15);
      }
    }
  }
}

TEST(EdgeFlux, FlatBottomHasNoSourceAndPlainSplitting) {
  const std::vector<double> l{0.4, 0.6};
  const double ui[2] = {0.5, -0.2}, vi[2] = {0.1, 0.3}, uj[2] = {-1.0, 0.2}, vj[2] = {0.0, 0.7};
  const SideState si{1.2, 0.3, ui, vi}, sj{0.8, 0.3, uj, vj};
  const Vec2 n = unit(2.0);
  FluxTriple F[2];
  const HRPair p = edge_flux(si, sj, n, l, g, F);
  const Vec2 S = hr_source(p.h_ij, si, si.h, si.zb, n, g);
  EXPECT_EQ(S.x, 0.0);
  EXPECT_EQ(S.y, 0.0);
  for (int a = 0; a < 2; ++a) {
    const FluxTriple ref = l[a] * (half_flux_plus(1.2, ui[a], vi[a], n, g) + half_flux_minus(0.8, uj[a], vj[a], n, g));
    expect_close(F[a], ref, 0.0);
  }
}

TEST(EdgeFlux, MassIsAntisymmetric) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> H(0.0, 3.0), Z(-1.0, 1.0), V(-4.0, 4.0), A(0.0, 2.0 * pi);
  const std::vector<double> l{1.0};
  for (int k = 0; k < 500; ++k) {
    const double ui = V(rng), vi = V(rng), uj = V(rng), vj = V(rng);
    const SideState si{H(rng), Z(rng), &ui, &vi}, sj{H(rng), Z(rng), &uj, &vj};
    const Vec2 n = unit(A(rng));
    FluxTriple a[1], b[1];
    edge_flux(si, sj, n, l, g, a);
    edge_flux(sj, si, -n, l, g, b);
    EXPECT_NEAR(a[0].h, -b[0].h, 1e-13 * std::max(1.0, std::abs(a[0].h)));
  }
}

TEST(MaxwellianMoments, ReproduceConservedAndPressureMoments) {
  const double h = 1.3, u = 0.7, v = -1.1, l = 0.25;
  const auto m = quadrature::maxwellian_moments(h, u, v, g, l);
  const double ha = l * h;
  EXPECT_NEAR(m[0], ha, 1e-10 * ha);
  EXPECT_NEAR(m[1], ha * u, 1e-10 * std::abs(ha * u));
  EXPECT_NEAR(m[2], ha * v, 1e-10 * std::abs(ha * v));
  EXPECT_NEAR(m[3], ha * u * u + 0.5 * g * ha * h, 1e-10 * m[3]);
  EXPECT_NEAR(m[4], ha * u * v, 1e-10 * std::abs(ha * u * v));
  EXPECT_NEAR(m[5], ha * v * v + 0.5 * g * ha * h, 1e-10 * m[5]);
  for (double x : quadrature::maxwellian_moments(0.0, u, v, g)) EXPECT_EQ(x, 0.0);
}
