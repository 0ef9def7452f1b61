#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracles {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

}  // namespace

Mat dense_inverse(const Mat& a) {
  const std::size_t n = a.rows();
  Mat aug(n, 2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1.0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::fabs(aug(i, col)) > std::fabs(aug(piv, col))) piv = i;
    if (std::fabs(aug(piv, col)) < 1e-300) throw std::runtime_error("dense_inverse: singular");
    if (piv != col)
      for (std::size_t j = 0; j < 2 * n; ++j) std::swap(aug(piv, j), aug(col, j));
    const double inv_p = 1.0 / aug(col, col);
    for (std::size_t j = 0; j < 2 * n; ++j) aug(col, j) *= inv_p;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double factor = aug(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < 2 * n; ++j) aug(i, j) -= factor * aug(col, j);
    }
  }
  Mat inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

double determinant(const Mat& a) {
  const std::size_t n = a.rows();
  Mat lu = a;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::fabs(lu(i, col)) > std::fabs(lu(piv, col))) piv = i;
    if (std::fabs(lu(piv, col)) < 1e-300) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(piv, j), lu(col, j));
      det = -det;
    }
    det *= lu(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      const double factor = lu(i, col) / lu(col, col);
      for (std::size_t j = col; j < n; ++j) lu(i, j) -= factor * lu(col, j);
    }
  }
  return det;
}

double mvn_logpdf_cov(const Vec& mean, const Mat& cov, const Vec& x) {
  const std::size_t n = mean.size();
  const Mat prec = dense_inverse(cov);
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean[i];
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) quad += d[i] * prec(i, j) * d[j];
  return -0.5 * (static_cast<double>(n) * kLog2Pi + std::log(determinant(cov)) + quad);
}

void schur_conditional(const Vec& mean, const Mat& cov, std::size_t m, const Vec& x2,
                       Vec* cond_mean, Mat* cond_cov) {
  const std::size_t n = mean.size();
  const std::size_t n2 = n - m;
  Mat s22(n2, n2), s12(m, n2), s11(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s11(i, j) = cov(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n2; ++j) s12(i, j) = cov(i, m + j);
  for (std::size_t i = 0; i < n2; ++i)
    for (std::size_t j = 0; j < n2; ++j) s22(i, j) = cov(m + i, m + j);
  const Mat s22_inv = dense_inverse(s22);
  Vec d(n2);
  for (std::size_t j = 0; j < n2; ++j) d[j] = x2[j] - mean[m + j];
  cond_mean->assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = mean[i];
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t k = 0; k < n2; ++k) acc += s12(i, j) * s22_inv(j, k) * d[k];
    (*cond_mean)[i] = acc;
  }
  *cond_cov = Mat(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double acc = s11(i, j);
      for (std::size_t p = 0; p < n2; ++p)
        for (std::size_t q = 0; q < n2; ++q) acc -= s12(i, p) * s22_inv(p, q) * s12(j, q);
      (*cond_cov)(i, j) = acc;
    }
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double m = 0.5 * (lo + hi);
  const double fa = f(lo), fm = f(m), fb = f(hi);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, lo, hi, fa, fm, fb, whole, tol, 40);
}

double chi2_quantile_quadrature(int d, double alpha) {
  auto pdf = [d](double x) {
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * d;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
  };
  // CDF(q) via quadrature; bisect CDF(q) = 1 - alpha.
  auto cdf = [&](double q) {
    if (q <= 0.0) return 0.0;
    // split at the mode-ish point for the integrable singularity at 0 (d=1)
    if (d == 1) {
      // substitute x = t^2: integral becomes 2 t dt weighting -> smooth
      auto g = [&](double t) { return pdf(t * t) * 2.0 * t; };
      return integrate(g, 0.0, std::sqrt(q), 1e-13);
    }
    return integrate(pdf, 0.0, q, 1e-13);
  };
  double lo = 0.0, hi = 1.0;
  while (cdf(hi) < 1.0 - alpha) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < 1.0 - alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-11) break;
  }
  return 0.5 * (lo + hi);
}

double gaussian_q_inv_quadrature(double eps) {
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) * 0.39894228040143267794; };
  auto tail = [&](double x) { return integrate(pdf, x, x + 20.0, 1e-14); };
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) > eps)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-11) break;
  }
  return 0.5 * (lo + hi);
}

Mat random_spd(std::size_t n, deterra::math::SeededRng& rng) {
  Mat b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.normal();
  Mat spd(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += b(i, k) * b(j, k);
      spd(i, j) = acc / static_cast<double>(n);
    }
  for (std::size_t i = 0; i < n; ++i) spd(i, i) += 0.2;
  return spd;
}

double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double mean_of(const Vec& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double variance_of(const Vec& v) {
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace oracles
