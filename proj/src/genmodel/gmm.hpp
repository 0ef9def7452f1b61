#pragma once

#include "mathcore/cholesky_gaussian.hpp"

namespace deterra::gen {

/// Weighted mixture of precision-Cholesky Gaussians, all of one dimension.
struct Gmm {
  Vec weights;
  std::vector<math::CholeskyGaussian> comps;

  std::size_t size() const { return comps.size(); }
  std::size_t dim() const { return comps.empty() ? 0 : comps.front().dim(); }
  /// Throws std::invalid_argument when weights are not a simplex (1e-12),
  /// dimensions differ, or a component breaks its invariants.
  void validate() const;
};

/// Numerically stable log-sum-exp over log pi_g + log p_g(x).
double gmm_log_likelihood(const Gmm& gmm, const Vec& x);

/// Inverse-CDF categorical draw, then a component sample.
Vec gmm_sample(const Gmm& gmm, math::SeededRng& rng);

/// Mixture mean sum_g pi_g mu_g.
Vec gmm_mean(const Gmm& gmm);

}  // namespace deterra::gen
