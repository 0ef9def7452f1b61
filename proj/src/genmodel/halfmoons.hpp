#pragma once

#include "genmodel/gmm.hpp"

namespace deterra::gen {

/// Two half-moon rings, rows (target y, condition x) - the leading block is
/// the conditioned-on-x target so the joint plugs straight into ea_cgmm_infer
/// with split m = 1.
Mat make_half_moons(std::size_t count, double noise_std, math::SeededRng& rng);

/// Noise-free branch values at condition x. Returns the number of branches
/// present (0, 1 or 2); y1/y2 are filled in order.
int half_moon_branches(double x, double* y1, double* y2);

struct BranchCoverageReport {
  std::size_t conditions_checked = 0;   // held-out conditions with two branches
  std::size_t conditions_covered = 0;   // both branch centers within tolerance
  double coverage() const {
    return conditions_checked == 0
               ? 0.0
               : static_cast<double>(conditions_covered) / conditions_checked;
  }
};

/// For each two-branch held-out condition: draw samples from the inferred
/// conditional, 2-means cluster the 1-D values, and require both cluster
/// centers to land within `tol` of the true branch values.
BranchCoverageReport branch_coverage(const Gmm& joint, const Vec& conditions, double alpha,
                                     std::size_t samples_per_condition, double tol,
                                     math::SeededRng& rng);

/// 1-D 2-means (Lloyd, min/max init); returns the two centers sorted.
void two_means_1d(const Vec& values, double* c_lo, double* c_hi);

}  // namespace deterra::gen
