#pragma once

#include "core/mat.hpp"

namespace deterra::math {

// Biased empirical MMD^2 between equally sized sample sets (rows of X and Y)
// under the Gaussian kernel k(a,b) = exp(-||a-b||^2 / (2 bw^2)).
// Throws on empty inputs, unequal counts, or bw <= 0.
double mmd_sq(const Mat& x, const Mat& y, double bandwidth);

// Median pairwise Euclidean distance over the pooled rows of X and Y;
// falls back to 1.0 when the median vanishes.
double median_heuristic_bandwidth(const Mat& x, const Mat& y);

}  // namespace deterra::math
