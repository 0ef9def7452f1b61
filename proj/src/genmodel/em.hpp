#pragma once

#include "genmodel/gmm.hpp"

namespace deterra::gen {

struct EmReport {
  Vec log_likelihood_per_iter;  // mean per-sample, non-decreasing
  int restarts = 0;
};

/// Full-covariance expectation-maximization with k-means++ initialization,
/// diagonal regularization 1e-6, at most 200 iterations or relative
/// log-likelihood change < 1e-8. Singular components trigger a restart with a
/// new seed (up to 5). Requires at least G*(n+2) samples. The result is an
/// independent reference fit used to validate learned mixtures.
Gmm em_fit(const Mat& data, std::size_t num_components, std::uint64_t seed,
           EmReport* report = nullptr);

}  // namespace deterra::gen
