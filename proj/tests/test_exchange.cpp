#include <gtest/gtest.h>

#include <random>

#include "layerflow/exchange.hpp"

using namespace layerflow;

namespace {

std::vector<std::vector<double>> dense(const Tridiagonal &A) {
  const std::size_t N = A.size();
  std::vector<std::vector<double>> M(N, std::vector<double>(N, 0.0));
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) M[r][c] = A(r, c);
  return M;
}

// Gaussian elimination with partial pivoting, used as the reference solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> M, std::vector<double> b) {
  const std::size_t N = b.size();
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < N; ++r)
      if (std::abs(M[r][k]) > std::abs(M[p][k])) p = r;
    std::swap(M[k], M[p]);
    std::swap(b[k], b[p]);
    for (std::size_t r = k + 1; r < N; ++r) {
      const double f = M[r][k] / M[k][k];
      for (std::size_t c = k; c < N; ++c) M[r][c] -= f * M[k][c];
      b[r] -= f * b[k];
    }
  }
  for (std::size_t k = N; k-- > 0;) {
    for (std::size_t c = k + 1; c < N; ++c) b[k] -= M[k][c] * b[c];
    b[k] /= M[k][k];
  }
  return b;
}

struct Random {
  std::mt19937_64 rng{17};
  int N() { return std::uniform_int_distribution<int>(1, 8)(rng); }
  double operator()(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
};

}  // namespace

TEST(ExchangeRates, SingleLayerHasNoExchange) {
  const auto G = exchange_rates({0.37}, {1.0});
  ASSERT_EQ(G.size(), 2u);
  EXPECT_EQ(G[0], 0.0);
  EXPECT_EQ(G[1], 0.0);
}

TEST(ExchangeRates, UniformDivergenceWithEqualFractionsIsZero) {
  for (int N = 2; N <= 8; ++N) {
    const auto G = exchange_rates(std::vector<double>(N, 0.8), std::vector<double>(N, 1.0 / N));
    for (double x : G) EXPECT_NEAR(x, 0.0, 1e-15);
  }
}

TEST(ExchangeRates, TwoLayers) {
  const auto G = exchange_rates({0.3, -0.5}, {0.5, 0.5});
  EXPECT_EQ(G[0], 0.0);
  EXPECT_NEAR(G[1], (0.3 - -0.5) / 2.0, 1e-16);
  EXPECT_EQ(G[2], 0.0);
}

TEST(ExchangeRates, TelescopeToLayerDepthChange) {
  // d(h_a)/dt = -D_a + G_{a+1/2} - G_{a-1/2} must equal l_a dh/dt = -l_a sum D
  Random R;
  for (int k = 0; k < 200; ++k) {
    const int N = R.N();
    std::vector<double> D(N), l(N);
    double s = 0.0, sd = 0.0;
    for (int a = 0; a < N; ++a) {
      D[a] = R(-2.0, 2.0);
      sd += D[a];
      s += (l[a] = R(0.1, 1.0));
    }
    for (auto &x : l) x /= s;
    const auto G = exchange_rates(D, l);
    for (int a = 0; a < N; ++a) EXPECT_NEAR(-D[a] + G[a + 1] - G[a], -l[a] * sd, 1e-13);
  }
}

TEST(BuildMatrix, ZeroRatesGiveIdentity) {
  const auto A = build_matrix(std::vector<double>(4, 0.0), {0.3, 0.4, 0.5}, 0.1);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(A(r, c), r == c ? 1.0 : 0.0);
}

TEST(BuildMatrix, TwoLayerExample) {
  const auto A = build_matrix({0.0, 0.1, 0.0}, {0.5, 0.5}, 0.1);
  EXPECT_NEAR(A(0, 0), 1.0, 1e-16);
  EXPECT_NEAR(A(0, 1), -0.02, 1e-16);
  EXPECT_NEAR(A(1, 0), 0.0, 1e-16);
  EXPECT_NEAR(A(1, 1), 1.02, 1e-16);
}

TEST(BuildMatrix, RejectsDryLayer) {
  EXPECT_THROW(build_matrix({0.0, 0.1, 0.0}, {0.5, 0.0}, 0.1), DomainError);
  EXPECT_THROW(build_matrix({0.0, 0.1}, {0.5, 0.5}, 0.1), DomainError);
}

TEST(BuildMatrix, ColumnSumsAreOneAndDiagonalDominates) {
  Random R;
  for (int k = 0; k < 300; ++k) {
    const int N = R.N();
    std::vector<double> G(N + 1, 0.0), h(N);
    for (int a = 1; a < N; ++a) G[a] = R(-3.0, 3.0);
    for (auto &x : h) x = R(1e-3, 2.0);
    const auto A = build_matrix(G, h, R(0.0, 0.5));
    for (int c = 0; c < N; ++c) {
      double s = 0.0, off = 0.0;
      for (int r = 0; r < N; ++r) {
        s += A(r, c);
        if (r != c) off += std::abs(A(r, c));
      }
      EXPECT_NEAR(s, 1.0, 1e-13 * (1.0 + off));
      EXPECT_GT(A(c, c), off);
    }
  }
}

TEST(ImplicitSolve, IdentityLeavesRhs) {
  const auto A = build_matrix(std::vector<double>(3, 0.0), {1.0, 1.0}, 1.0);
  EXPECT_EQ(implicit_solve(A, {0.3, -7.0}), (std::vector<double>{0.3, -7.0}));
}

TEST(ImplicitSolve, TwoLayerExample) {
  const auto A = build_matrix({0.0, 0.1, 0.0}, {0.5, 0.5}, 0.1);
  const double q1 = 0.7, q2 = -1.3;
  const auto x = implicit_solve(A, {q1, q2});
  EXPECT_NEAR(x[0], q1 + 0.02 / 1.02 * q2, 1e-15);
  EXPECT_NEAR(x[1], q2 / 1.02, 1e-15);
}

TEST(ImplicitSolve, MatchesDenseSolveAndConservesMomentum) {
  Random R;
  for (int k = 0; k < 300; ++k) {
    const int N = R.N();
    std::vector<double> G(N + 1, 0.0), h(N), q(N);
    for (int a = 1; a < N; ++a) G[a] = R(-5.0, 5.0);
    for (auto &x : h) x = R(1e-3, 3.0);
    for (auto &x : q) x = R(-2.0, 2.0);
    const auto A = build_matrix(G, h, R(0.0, 1.0));
    const auto x = implicit_solve(A, q);
    const auto y = dense_solve(dense(A), q);
    double sq = 0.0, sx = 0.0, scale = 0.0;
    for (int a = 0; a < N; ++a) {
      EXPECT_NEAR(x[a], y[a], 1e-12 * std::max(1.0, std::abs(y[a])));
      sq += q[a];
      sx += x[a];
      scale += std::abs(q[a]);
    }
    EXPECT_NEAR(sx, sq, 1e-12 * scale);
  }
}

TEST(ImplicitSolve, InverseIsNonnegative) {
  Random R;
  for (int k = 0; k < 200; ++k) {
    const int N = R.N();
    std::vector<double> G(N + 1, 0.0), h(N);
    for (int a = 1; a < N; ++a) G[a] = R(-5.0, 5.0);
    for (auto &x : h) x = R(1e-3, 3.0);
    const auto A = build_matrix(G, h, R(0.0, 1.0));
    for (int c = 0; c < N; ++c) {
      std::vector<double> e(N, 0.0);
      e[c] = 1.0;
      for (double x : implicit_solve(A, e)) EXPECT_GE(x, -1e-14);
    }
  }
}

TEST(ImplicitSolve, AllGZeroIsBitwiseIdentity) {
  const auto A = build_matrix(std::vector<double>(6, 0.0), {0.2, 0.2, 0.2, 0.2, 0.2}, 3.0);
  const std::vector<double> q{0.1, 1e-300, -3.3, 7.0 / 3.0, 0.0};
  EXPECT_EQ(implicit_solve(A, q), q);
}
