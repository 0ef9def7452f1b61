#pragma once

#include "core/mat.hpp"

namespace deterra::nn {

/// Knot vector for order-d B-splines over g grid intervals, extended d knots
/// beyond each end. num_basis() = g + d functions form a partition of unity
/// on [lo, hi]. Inputs outside the grid are clamped to the range.
struct BsplineGrid {
  Vec knots;  // g + 1 + 2d knots, strictly increasing
  int grid_size = 0;
  int order = 0;

  int num_basis() const { return grid_size + order; }
  double lo() const { return knots[static_cast<std::size_t>(order)]; }
  double hi() const { return knots[knots.size() - 1 - static_cast<std::size_t>(order)]; }
};

BsplineGrid uniform_grid(double lo, double hi, int g, int d);

/// Quantile grid blended toward uniform by grid_eps (1 = fully uniform),
/// with a monotonicity guard. Falls back to uniform for degenerate samples.
BsplineGrid blended_grid(Vec samples, double lo, double hi, int g, int d, double grid_eps);

/// Writes the num_basis() basis values at x (clamped into the grid).
void bspline_basis(const BsplineGrid& grid, double x, double* out);

/// Basis values and their derivatives at x. Outside the grid the derivative
/// is zero (clamped input).
void bspline_basis_deriv(const BsplineGrid& grid, double x, double* out, double* dout);

}  // namespace deterra::nn
