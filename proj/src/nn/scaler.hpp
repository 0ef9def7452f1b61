#pragma once

#include "core/mat.hpp"

namespace deterra::nn {

/// Per-dimension affine map from the observed [min, max] onto [-1, 1].
/// Dimensions that are constant in the fitting data map to 0 (and invert back
/// to the constant).
struct Scaler {
  Vec lo, hi;

  std::size_t dim() const { return lo.size(); }
  Vec apply(const Vec& x) const;
  Vec invert(const Vec& y) const;
  Mat apply_rows(const Mat& x) const;
  Mat invert_rows(const Mat& y) const;
};

/// Throws std::invalid_argument on an empty dataset.
Scaler fit_scaler(const Mat& data);

/// Target standardization to zero mean / unit variance.
struct TargetScaler {
  double mean = 0.0;
  double stddev = 1.0;
  double apply(double y) const { return (y - mean) / stddev; }
  double invert(double z) const { return z * stddev + mean; }
};

TargetScaler fit_target_scaler(const Vec& y);

}  // namespace deterra::nn
