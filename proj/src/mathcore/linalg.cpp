#include "mathcore/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace deterra::math {

Vec upper_matvec(const Mat& u, const Vec& x) {
  const std::size_t n = u.rows();
  assert(u.cols() == n && x.size() == n);
  Vec y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = u.row(i);
    for (std::size_t j = i; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec upper_solve(const Mat& u, const Vec& b) {
  const std::size_t n = u.rows();
  assert(u.cols() == n && b.size() == n);
  Vec x(b);
  for (std::size_t ii = n; ii-- > 0;) {
    const double* row = u.row(ii);
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= row[j] * x[j];
    x[ii] = acc / row[ii];
  }
  return x;
}

Vec upper_solve_t(const Mat& u, const Vec& b) {
  const std::size_t n = u.rows();
  assert(u.cols() == n && b.size() == n);
  Vec x(b);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= u(j, i) * x[j];
    x[i] = acc / u(i, i);
  }
  return x;
}

Mat upper_inverse(const Mat& u) {
  const std::size_t n = u.rows();
  Mat inv(n, n, 0.0);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vec col = upper_solve(u, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i <= j; ++i) inv(i, j) = col[i];
  }
  return inv;
}

Mat cholesky_lower(const Mat& a) {
  const std::size_t n = a.rows();
  assert(a.cols() == n);
  Mat l(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      if (i == j) {
        if (acc <= 0.0 || !std::isfinite(acc))
          throw std::runtime_error("cholesky_lower: matrix not positive definite");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }
  return l;
}

Mat precision_chol_from_cov(const Mat& cov) {
  // Reverse both indices, factor, reverse back: cov = R R^T with R upper
  // triangular, then U = R^{-1} satisfies U^T U = cov^{-1}.
  const std::size_t n = cov.rows();
  Mat flipped(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) flipped(i, j) = cov(n - 1 - i, n - 1 - j);
  const Mat l = cholesky_lower(flipped);
  Mat r(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) r(n - 1 - i, n - 1 - j) = l(i, j);
  Mat u = upper_inverse(r);
  // R has positive diagonal, so does U.
  return u;
}

}  // namespace deterra::math
