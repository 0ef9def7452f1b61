#pragma once

#include "core/mat.hpp"
#include "mathcore/rng.hpp"

namespace deterra::math {

/// Leading-block size for partitioning a joint Gaussian into x1 (first m
/// coordinates) and x2 (the rest).
struct BlockSplit {
  std::size_t m;
};

/// Multivariate normal stored as mean plus the upper-triangular Cholesky
/// factor U of the precision matrix (precision = U^T U). The diagonal of U is
/// floored at kDiagFloor and everything strictly below the diagonal is zero.
struct CholeskyGaussian {
  static constexpr double kDiagFloor = 1e-4;

  Vec mean;
  Mat chol_factor;

  CholeskyGaussian() = default;
  /// Normalizes the factor: zeroes the strict lower triangle and floors the
  /// diagonal.
  CholeskyGaussian(Vec mean_in, Mat chol_in);

  /// Converts moments into precision-Cholesky form (reversed-Cholesky route,
  /// no dense inversion). Throws if cov is not positive definite.
  static CholeskyGaussian from_moments(const Vec& mean, const Mat& cov);

  std::size_t dim() const { return mean.size(); }
  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;

  /// Fully normalized log density:
  ///   -(n/2) ln 2pi - 1/2 ||U(x-mu)||^2 + sum_j ln U_jj
  double log_density(const Vec& x) const;

  /// mu + U^{-1} eps with eps ~ N(0,I); solved by back-substitution.
  Vec sample(SeededRng& rng) const;
  /// Same draw with the noise supplied by the caller.
  Vec sample_with_noise(const Vec& eps) const;

  /// Distribution of the trailing block x2: N(mu2, (U22^T U22)^{-1}).
  CholeskyGaussian marginal_block(BlockSplit split) const;

  /// Distribution of x1 given x2 = x2_star:
  ///   mean = mu1 - U11^{-1} U12 (x2* - mu2),  factor = U11.
  CholeskyGaussian conditional_block(BlockSplit split, const Vec& x2_star) const;

  /// ||U(w - mu)||^2, the squared Mahalanobis distance.
  double mahalanobis_sq(const Vec& w_star) const;

  /// Dense covariance (U^T U)^{-1}, assembled column-wise from triangular
  /// solves. Intended for reporting and tests, not hot paths.
  Mat covariance() const;

  /// Differential entropy in nats.
  double entropy() const;
};

}  // namespace deterra::math
