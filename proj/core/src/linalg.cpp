#include "ppfpn/linalg.hpp"

#include <cmath>
#include <cstddef>

#include "ppfpn/errors.hpp"

namespace ppfpn::linalg {

namespace {

// In-place partial-pivot LU; perm holds the row permutation.
void lu_factor(std::vector<double>& A, std::vector<int>& perm, std::size_t n) {
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::fabs(A[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(A[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw SolverFailure("singular matrix in dense solve");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
      std::swap(perm[k], perm[piv]);
    }
    const double d = A[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i * n + k] / d;
      A[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) A[i * n + j] -= f * A[k * n + j];
    }
  }
}

std::vector<double> lu_solve(const std::vector<double>& LU, const std::vector<int>& perm,
                             const std::vector<double>& b, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[static_cast<std::size_t>(perm[i])];
  for (std::size_t i = 1; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= LU[i * n + j] * x[j];
    x[i] = acc;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= LU[ii * n + j] * x[j];
    x[ii] = acc / LU[ii * n + ii];
  }
  return x;
}

}  // namespace

std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
  const std::size_t n = b.size();
  const std::vector<double> A0 = A;
  std::vector<int> perm;
  lu_factor(A, perm, n);
  std::vector<double> x = lu_solve(A, perm, b, n);

  // One refinement pass with extended-precision residual.
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = b[i];
    for (std::size_t j = 0; j < n; ++j)
      acc -= static_cast<long double>(A0[i * n + j]) * static_cast<long double>(x[j]);
    r[i] = static_cast<double>(acc);
  }
  const std::vector<double> dx = lu_solve(A, perm, r, n);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  return x;
}

double residual_inf(const std::vector<double>& A, const std::vector<double>& x,
                    const std::vector<double>& b) {
  const std::size_t n = b.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = b[i];
    for (std::size_t j = 0; j < n; ++j)
      acc -= static_cast<long double>(A[i * n + j]) * static_cast<long double>(x[j]);
    worst = std::max(worst, static_cast<double>(std::fabs(static_cast<double>(acc))));
  }
  return worst;
}

}
