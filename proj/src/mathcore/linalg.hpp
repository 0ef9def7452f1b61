#pragma once

#include "core/mat.hpp"

// Triangular and Cholesky primitives. Everything solves by substitution;
// no routine here forms a dense inverse of a full matrix.
namespace deterra::math {

// y = U x with U upper triangular (only the upper part of U is read).
Vec upper_matvec(const Mat& u, const Vec& x);
// Solve U x = b by back-substitution.
Vec upper_solve(const Mat& u, const Vec& b);
// Solve U^T x = b by forward-substitution.
Vec upper_solve_t(const Mat& u, const Vec& b);
// Inverse of an upper-triangular matrix, column by column back-substitution.
Mat upper_inverse(const Mat& u);

// Lower Cholesky factor of a symmetric positive-definite matrix: A = L L^T.
// Throws std::runtime_error if A is not positive definite.
Mat cholesky_lower(const Mat& a);

// Upper-triangular U with positive diagonal such that U^T U = A^{-1},
// computed through the reversed-Cholesky identity (no dense inversion).
Mat precision_chol_from_cov(const Mat& cov);

}  // namespace deterra::math
