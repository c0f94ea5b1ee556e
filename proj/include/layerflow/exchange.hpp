#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace layerflow {

/// Interface mass-exchange rates G_{1/2}..G_{N+1/2} from per-layer mass-flux
/// divergences D_k. Positive G_{a+1/2} feeds layer a from layer a+1.
inline std::vector<double> exchange_rates(const std::vector<double> &D, const std::vector<double> &l) {
  const std::size_t N = D.size();
  std::vector<double> G(N + 1, 0.0);
  double lsum = 0.0;
  for (std::size_t a = 0; a + 1 < N; ++a) {
    lsum += l[a];
    double s = 0.0;
    for (std::size_t k = 0; k < N; ++k) s += (lsum - (k <= a ? 1.0 : 0.0)) * D[k];
    G[a + 1] = -s;
  }
  return G;
}

/// Tridiagonal N x N matrix stored by diagonals: row a holds lower[a] (column a-1),
/// diag[a], upper[a] (column a+1).
struct Tridiagonal {
  std::vector<double> lower, diag, upper;

  std::size_t size() const { return diag.size(); }

  double operator()(std::size_t r, std::size_t c) const {
    if (r == c) return diag[r];
    if (c + 1 == r) return lower[r];
    if (r + 1 == c) return upper[r];
    return 0.0;
  }
};

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? x : 0.0; }

/// Implicit exchange matrix acting on the layer momenta. Each column is divided
/// by the depth of the layer whose velocity it carries, which makes every
/// column sum to one.
inline Tridiagonal build_matrix(const std::vector<double> &G, const std::vector<double> &h_layer, double dt) {
  const std::size_t N = h_layer.size();
  if (G.size() != N + 1) throw DomainError("exchange rates must have N+1 entries");
  for (double x : h_layer)
    if (!(x > 0.0)) throw DomainError("exchange matrix needs positive layer depths");
  Tridiagonal A{std::vector<double>(N, 0.0), std::vector<double>(N, 1.0), std::vector<double>(N, 0.0)};
  for (std::size_t a = 0; a < N; ++a) {
    A.diag[a] += dt * (pos_part(G[a]) - neg_part(G[a + 1])) / h_layer[a];
    if (a + 1 < N) A.upper[a] = -dt * pos_part(G[a + 1]) / h_layer[a + 1];
    if (a > 0) A.lower[a] = dt * neg_part(G[a]) / h_layer[a - 1];
  }
  return A;
}

/// Solves A x = rhs in place by tridiagonal elimination. Column diagonal
/// dominance keeps the pivots positive without row exchanges.
inline void implicit_solve(const Tridiagonal &A, double *x, double *work) {
  const std::size_t N = A.size();
  double piv = A.diag[0];
  if (!(piv > 0.0)) throw DomainError("singular exchange matrix");
  x[0] /= piv;
  for (std::size_t a = 1; a < N; ++a) {
    work[a] = A.upper[a - 1] / piv;
    piv = A.diag[a] - A.lower[a] * work[a];
    if (!(piv > 0.0)) throw DomainError("singular exchange matrix");
    x[a] = (x[a] - A.lower[a] * x[a - 1]) / piv;
  }
  for (std::size_t a = N - 1; a-- > 0;) x[a] -= work[a + 1] * x[a + 1];
}

inline std::vector<double> implicit_solve(const Tridiagonal &A, std::vector<double> rhs) {
  std::vector<double> work(A.size());
  implicit_solve(A, rhs.data(), work.data());
  return rhs;
}

}  // namespace layerflow
