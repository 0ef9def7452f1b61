#include "genmodel/gmm.hpp"

#include <cmath>
#include <stdexcept>

namespace deterra::gen {

void Gmm::validate() const {
  if (comps.empty()) throw std::invalid_argument("Gmm: no components");
  if (weights.size() != comps.size())
    throw std::invalid_argument("Gmm: weights/components mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("Gmm: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("Gmm: weights must sum to 1");
  const std::size_t n = comps.front().dim();
  for (const auto& c : comps) {
    if (c.dim() != n) throw std::invalid_argument("Gmm: component dimension mismatch");
    c.validate();
  }
}

double gmm_log_likelihood(const Gmm& gmm, const Vec& x) {
  if (x.size() != gmm.dim()) throw std::invalid_argument("gmm_log_likelihood: dim mismatch");
  double hi = -std::numeric_limits<double>::infinity();
  Vec terms(gmm.size());
  for (std::size_t g = 0; g < gmm.size(); ++g) {
    terms[g] = gmm.weights[g] > 0.0
                   ? std::log(gmm.weights[g]) + gmm.comps[g].log_density(x)
                   : -std::numeric_limits<double>::infinity();
    hi = std::max(hi, terms[g]);
  }
  if (!std::isfinite(hi)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

Vec gmm_sample(const Gmm& gmm, math::SeededRng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  std::size_t pick = gmm.size() - 1;
  for (std::size_t g = 0; g < gmm.size(); ++g) {
    cum += gmm.weights[g];
    if (u < cum) {
      pick = g;
      break;
    }
  }
  return gmm.comps[pick].sample(rng);
}

Vec gmm_mean(const Gmm& gmm) {
  Vec m(gmm.dim(), 0.0);
  for (std::size_t g = 0; g < gmm.size(); ++g)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += gmm.weights[g] * gmm.comps[g].mean[i];
  return m;
}

}  // namespace deterra::gen
