#include "genmodel/eacgmm.hpp"

#include <cmath>
#include <stdexcept>

#include "mathcore/linalg.hpp"
#include "mathcore/special.hpp"

namespace deterra::gen {

EaCgmmResult ea_cgmm_infer(const Gmm& joint, math::BlockSplit split, const Vec& w_star,
                           double alpha) {
  const std::size_t d = joint.dim() - split.m;
  return ea_cgmm_infer_with_threshold(joint, split, w_star,
                                      math::chi2_quantile(static_cast<int>(d), alpha));
}

EaCgmmResult ea_cgmm_infer_with_threshold(const Gmm& joint, math::BlockSplit split,
                                          const Vec& w_star, double chi2_threshold) {
  const std::size_t n = joint.dim();
  if (split.m == 0 || split.m >= n)
    throw std::invalid_argument("ea_cgmm_infer: split out of range");
  const std::size_t d = n - split.m;
  if (w_star.size() != d) throw std::invalid_argument("ea_cgmm_infer: condition dim mismatch");
  const std::size_t j_count = joint.size();

  EaCgmmResult out;
  out.chi2_threshold = chi2_threshold;
  out.mahalanobis_sq.resize(j_count);
  out.credible_mask.assign(j_count, 0);
  out.conditional.weights.assign(j_count, 0.0);

  Vec log_marginals(j_count);
  int credible = 0;
  for (std::size_t j = 0; j < j_count; ++j) {
    out.conditional.comps.push_back(joint.comps[j].conditional_block(split, w_star));
    const math::CholeskyGaussian marg = joint.comps[j].marginal_block(split);
    // z_j = U22 (w* - mu2); both the distance and the log marginal reuse it
    Vec centered(d);
    for (std::size_t i = 0; i < d; ++i) centered[i] = w_star[i] - marg.mean[i];
    const Vec z = math::upper_matvec(marg.chol_factor, centered);
    const double eps_j = norm_sq(z);
    out.mahalanobis_sq[j] = eps_j;
    double log_det = 0.0;
    for (std::size_t i = 0; i < d; ++i) log_det += std::log(marg.chol_factor(i, i));
    log_marginals[j] = -0.5 * eps_j + log_det;
    if (eps_j < chi2_threshold) {
      out.credible_mask[j] = 1;
      ++credible;
    }
  }

  if (credible > 0) {
    out.mask_used = true;
    for (std::size_t j = 0; j < j_count; ++j)
      out.conditional.weights[j] =
          out.credible_mask[j] ? 1.0 / static_cast<double>(credible) : 0.0;
  } else {
    out.mask_used = false;
    const double hi = *std::max_element(log_marginals.begin(), log_marginals.end());
    double denom = 0.0;
    for (double lm : log_marginals) denom += std::exp(lm - hi);
    for (std::size_t j = 0; j < j_count; ++j)
      out.conditional.weights[j] = std::exp(log_marginals[j] - hi) / denom;
  }
  return out;
}

}  // namespace deterra::gen
