#include "mathcore/cholesky_gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernels/kernels.hpp"
#include "mathcore/linalg.hpp"

namespace deterra::math {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

[[noreturn]] void dim_error(const char* what) {
  throw std::invalid_argument(std::string("CholeskyGaussian: ") + what);
}
}  // namespace

CholeskyGaussian::CholeskyGaussian(Vec mean_in, Mat chol_in)
    : mean(std::move(mean_in)), chol_factor(std::move(chol_in)) {
  const std::size_t n = mean.size();
  if (chol_factor.rows() != n || chol_factor.cols() != n) dim_error("factor shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) chol_factor(i, j) = 0.0;
    if (!(chol_factor(i, i) >= kDiagFloor)) {
      if (!std::isfinite(chol_factor(i, i))) dim_error("non-finite diagonal");
      chol_factor(i, i) = kDiagFloor;
    }
  }
}

CholeskyGaussian CholeskyGaussian::from_moments(const Vec& mean, const Mat& cov) {
  return CholeskyGaussian(mean, precision_chol_from_cov(cov));
}

void CholeskyGaussian::validate() const {
  const std::size_t n = dim();
  if (chol_factor.rows() != n || chol_factor.cols() != n) dim_error("factor shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(chol_factor(i, i) >= kDiagFloor)) dim_error("diagonal below floor");
    for (std::size_t j = 0; j < i; ++j)
      if (chol_factor(i, j) != 0.0) dim_error("nonzero below diagonal");
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(chol_factor(i, j))) dim_error("non-finite factor entry");
    if (!std::isfinite(mean[i])) dim_error("non-finite mean entry");
  }
}

double CholeskyGaussian::log_density(const Vec& x) const {
  const std::size_t n = dim();
  if (x.size() != n) dim_error("log_density dimension mismatch");
  Vec centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean[i];
  const Vec r = upper_matvec(chol_factor, centered);
  double log_det = 0.0;
  for (std::size_t i = 0; i < n; ++i) log_det += std::log(chol_factor(i, i));
  return -0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * norm_sq(r) + log_det;
}

Vec CholeskyGaussian::sample(SeededRng& rng) const {
  Vec eps(dim());
  rng.fill_normal(eps);
  return sample_with_noise(eps);
}

Vec CholeskyGaussian::sample_with_noise(const Vec& eps) const {
  if (eps.size() != dim()) dim_error("noise dimension mismatch");
  Vec x = upper_solve(chol_factor, eps);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += mean[i];
  return x;
}

CholeskyGaussian CholeskyGaussian::marginal_block(BlockSplit split) const {
  const std::size_t n = dim();
  const std::size_t m = split.m;
  if (m == 0 || m >= n) dim_error("split out of range");
  const std::size_t n2 = n - m;
  Vec mu2(mean.begin() + m, mean.end());
  Mat u22(n2, n2);
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t j = 0; j < n2; ++j) u22(i, j) = chol_factor(m + i, m + j);
  return CholeskyGaussian(std::move(mu2), std::move(u22));
}

CholeskyGaussian CholeskyGaussian::conditional_block(BlockSplit split, const Vec& x2_star) const {
  const std::size_t n = dim();
  const std::size_t m = split.m;
  if (m == 0 || m >= n) dim_error("split out of range");
  const std::size_t n2 = n - m;
  if (x2_star.size() != n2) dim_error("conditional dimension mismatch");

  Vec delta(n2);
  for (std::size_t j = 0; j < n2; ++j) delta[j] = x2_star[j] - mean[m + j];
  // rhs = U12 (x2* - mu2)
  Vec rhs(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = chol_factor.row(i);
    rhs[i] = kern::dot(row + m, delta.data(), n2);
  }
  Mat u11(m, m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) u11(i, j) = chol_factor(i, j);
  const Vec shift = upper_solve(u11, rhs);
  Vec mu(m);
  for (std::size_t i = 0; i < m; ++i) mu[i] = mean[i] - shift[i];
  return CholeskyGaussian(std::move(mu), std::move(u11));
}

double CholeskyGaussian::mahalanobis_sq(const Vec& w_star) const {
  const std::size_t n = dim();
  if (w_star.size() != n) dim_error("mahalanobis dimension mismatch");
  Vec centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = w_star[i] - mean[i];
  return norm_sq(upper_matvec(chol_factor, centered));
}

Mat CholeskyGaussian::covariance() const {
  const std::size_t n = dim();
  Mat cov(n, n);
  Vec e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    // Sigma e_j = U^{-1} U^{-T} e_j
    const Vec col = upper_solve(chol_factor, upper_solve_t(chol_factor, e));
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) cov(i, j) = col[i];
  }
  return cov;
}

double CholeskyGaussian::entropy() const {
  const std::size_t n = dim();
  double log_det_u = 0.0;
  for (std::size_t i = 0; i < n; ++i) log_det_u += std::log(chol_factor(i, i));
  // H = n/2 (1 + ln 2pi) - ln det U
  return 0.5 * static_cast<double>(n) * (1.0 + kLog2Pi) - log_det_u;
}

}  // namespace deterra::math
