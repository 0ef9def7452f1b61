#include "mathcore/special.hpp"

#include <cmath>
#include <stdexcept>

namespace deterra::math {
namespace {

double gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a,x) by modified Lentz continued fraction.
double gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double lower_reg_gamma(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_cf(a, x);
}

double gaussian_q(double x) { return 0.5 * std::erfc(x * 0.70710678118654752440); }

double gaussian_q_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("gaussian_q_inv: eps outside (0,1)");
  // Acklam's rational approximation of the normal quantile, applied to the
  // lower-tail probability p = eps (x = -Phi^{-1}(eps) = Q^{-1}(eps)).
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p = eps;
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  x = -x;  // lower-tail quantile -> upper-tail argument
  // Halley polish on Q(x) - eps = 0; Q' = -phi.
  for (int it = 0; it < 3; ++it) {
    const double err = gaussian_q(x) - eps;
    const double phi = std::exp(-0.5 * x * x) * 0.39894228040143267794;
    if (phi <= 0.0) break;
    const double newton = err / phi;
    x += newton / (1.0 - 0.5 * x * newton);
  }
  return x;
}

double chi2_pdf(int d, double x) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * d;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * 0.69314718055994530942 -
                  std::lgamma(a));
}

double chi2_quantile(int d, double alpha) {
  if (d < 1) throw std::invalid_argument("chi2_quantile: d must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("chi2_quantile: alpha outside (0,1)");
  const double target = 1.0 - alpha;  // lower CDF at the quantile
  // Wilson-Hilferty start.
  const double z = gaussian_q_inv(alpha);
  const double dd = static_cast<double>(d);
  double t = 1.0 - 2.0 / (9.0 * dd) + z * std::sqrt(2.0 / (9.0 * dd));
  double q = dd * t * t * t;
  if (!(q > 0.0)) q = 1e-8;

  double lo = 0.0, hi = -1.0;  // hi < 0 means unbracketed above
  for (int it = 0; it < 200; ++it) {
    const double cdf = lower_reg_gamma(0.5 * dd, 0.5 * q);
    const double err = cdf - target;
    if (err > 0.0)
      hi = (hi < 0.0) ? q : std::min(hi, q);
    else
      lo = std::max(lo, q);
    if (std::fabs(err) < 1e-14) break;
    const double pdf = chi2_pdf(d, q);
    double next = q;
    if (pdf > 1e-300) next = q - err / pdf;
    const bool inside = next > lo && (hi < 0.0 || next < hi);
    if (!inside) next = (hi < 0.0) ? (lo > 0.0 ? lo * 2.0 + 1.0 : 1.0) : 0.5 * (lo + hi);
    if (std::fabs(next - q) < 1e-13 * (1.0 + q) && std::fabs(err) < 1e-10) {
      q = next;
      break;
    }
    q = next;
  }
  return q;
}

}  // namespace deterra::math
