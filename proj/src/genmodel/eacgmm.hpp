#pragma once

#include "genmodel/gmm.hpp"

namespace deterra::gen {

struct EaCgmmResult {
  Gmm conditional;                 // weights pi' with per-component conditionals
  Vec mahalanobis_sq;              // epsilon_j on the conditioning marginal
  std::vector<int> credible_mask;  // m_j = 1[eps_j < chi2 threshold]
  bool mask_used = false;          // false -> softmax-of-log-marginal fallback
  double chi2_threshold = 0.0;
};

/// Evidence-aware conditional inference on a joint mixture over (x1, x2):
/// per component, condition the leading block on x2 = w_star analytically,
/// gate components by the squared Mahalanobis distance of w_star under their
/// x2 marginal against the upper-alpha chi-squared quantile, and reweight
/// uniformly over credible components (softmax over log marginal densities
/// when none are credible).
EaCgmmResult ea_cgmm_infer(const Gmm& joint, math::BlockSplit split, const Vec& w_star,
                           double alpha);

/// Same, with a precomputed chi-squared threshold (hot-path variant).
EaCgmmResult ea_cgmm_infer_with_threshold(const Gmm& joint, math::BlockSplit split,
                                          const Vec& w_star, double chi2_threshold);

}  // namespace deterra::gen
