#pragma once

namespace deterra::math {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise.
double lower_reg_gamma(double a, double x);

// Gaussian tail Q(x) = P(Z > x) for Z ~ N(0,1).
double gaussian_q(double x);

// Inverse tail: returns x with Q(x) = eps, |error| <= 1e-9. Rational
// approximation polished by Halley steps on erfc. Throws on eps outside (0,1).
double gaussian_q_inv(double eps);

// Upper-alpha quantile of chi-squared with d degrees of freedom: returns q
// with P(X > q) = alpha, |error| <= 1e-8. Newton on the regularized
// incomplete gamma with Wilson-Hilferty initialization. Throws on alpha
// outside (0,1) or d < 1.
double chi2_quantile(int d, double alpha);

// chi-squared density, used by the quantile Newton iteration and tests.
double chi2_pdf(int d, double x);

}  // namespace deterra::math
