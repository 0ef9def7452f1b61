#include "genmodel/halfmoons.hpp"

#include <cmath>

#include "genmodel/eacgmm.hpp"
#include "mathcore/special.hpp"

namespace deterra::gen {
namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mat make_half_moons(std::size_t count, double noise_std, math::SeededRng& rng) {
  Mat out(count, 2);
  for (std::size_t i = 0; i < count; ++i) {
    const double theta = rng.uniform(0.0, kPi);
    double x, y;
    if (rng.uniform01() < 0.5) {
      x = std::cos(theta);
      y = std::sin(theta);
    } else {
      x = 1.0 - std::cos(theta);
      y = 0.5 - std::sin(theta);
    }
    out(i, 0) = y + noise_std * rng.normal();  // target leads
    out(i, 1) = x + noise_std * rng.normal();  // condition trails
  }
  return out;
}

int half_moon_branches(double x, double* y1, double* y2) {
  int n = 0;
  if (x >= -1.0 && x <= 1.0) {
    *y1 = std::sqrt(std::max(0.0, 1.0 - x * x));
    n = 1;
  }
  if (x >= 0.0 && x <= 2.0) {
    const double v = 0.5 - std::sqrt(std::max(0.0, 1.0 - (1.0 - x) * (1.0 - x)));
    if (n == 0)
      *y1 = v;
    else
      *y2 = v;
    ++n;
  }
  return n;
}

void two_means_1d(const Vec& values, double* c_lo, double* c_hi) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double c0 = lo, c1 = hi;
  for (int iter = 0; iter < 100; ++iter) {
    double s0 = 0.0, s1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (double v : values) {
      if (std::fabs(v - c0) <= std::fabs(v - c1)) {
        s0 += v;
        ++n0;
      } else {
        s1 += v;
        ++n1;
      }
    }
    const double new0 = n0 ? s0 / static_cast<double>(n0) : c0;
    const double new1 = n1 ? s1 / static_cast<double>(n1) : c1;
    if (std::fabs(new0 - c0) < 1e-12 && std::fabs(new1 - c1) < 1e-12) break;
    c0 = new0;
    c1 = new1;
  }
  *c_lo = std::min(c0, c1);
  *c_hi = std::max(c0, c1);
}

BranchCoverageReport branch_coverage(const Gmm& joint, const Vec& conditions, double alpha,
                                     std::size_t samples_per_condition, double tol,
                                     math::SeededRng& rng) {
  BranchCoverageReport rep;
  const double threshold = math::chi2_quantile(1, alpha);
  for (double x : conditions) {
    double b1 = 0.0, b2 = 0.0;
    if (half_moon_branches(x, &b1, &b2) != 2) continue;
    ++rep.conditions_checked;
    const EaCgmmResult inf =
        ea_cgmm_infer_with_threshold(joint, math::BlockSplit{1}, Vec{x}, threshold);
    Vec draws(samples_per_condition);
    for (auto& v : draws) v = gmm_sample(inf.conditional, rng)[0];
    double c_lo = 0.0, c_hi = 0.0;
    two_means_1d(draws, &c_lo, &c_hi);
    const double want_lo = std::min(b1, b2), want_hi = std::max(b1, b2);
    if (std::fabs(c_lo - want_lo) <= tol && std::fabs(c_hi - want_hi) <= tol)
      ++rep.conditions_covered;
  }
  return rep;
}

}  // namespace deterra::gen
