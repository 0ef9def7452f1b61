#include "genmodel/em.hpp"

#include <cmath>
#include <stdexcept>

#include "kernels/kernels.hpp"

namespace deterra::gen {
namespace {

std::vector<Vec> kmeanspp_centers(const Mat& data, std::size_t k, math::SeededRng& rng) {
  const std::size_t n = data.rows(), d = data.cols();
  std::vector<Vec> centers;
  centers.push_back(data.row_vec(static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(n - 1)))));
  Vec dist(n, 0.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers)
        best = std::min(best, kern::sq_dist(data.row(i), c.data(), d));
      dist[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(data.row_vec(static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(n - 1)))));
      continue;
    }
    double u = rng.uniform01() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      u -= dist[i];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(data.row_vec(pick));
  }
  return centers;
}

Gmm run_em(const Mat& data, std::size_t k, math::SeededRng& rng, EmReport* report) {
  const std::size_t n = data.rows(), d = data.cols();
  const double reg = 1e-6;

  // init: k-means++ centers, shared covariance from the data spread
  std::vector<Vec> means = kmeanspp_centers(data, k, rng);
  Vec grand(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) grand[j] += data(i, j);
  for (auto& g : grand) g /= static_cast<double>(n);
  Mat shared(d, d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        shared(a, b) += (data(i, a) - grand[a]) * (data(i, b) - grand[b]);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) shared(a, b) /= static_cast<double>(n);
    shared(a, a) += reg;
  }

  Vec weights(k, 1.0 / static_cast<double>(k));
  std::vector<Mat> covs(k, shared);

  Mat resp(n, k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  if (report) report->log_likelihood_per_iter.clear();

  for (int iter = 0; iter < 200; ++iter) {
    // E-step through the Cholesky-precision form
    Gmm cur;
    cur.weights = weights;
    for (std::size_t g = 0; g < k; ++g)
      cur.comps.push_back(math::CholeskyGaussian::from_moments(means[g], covs[g]));

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec x = data.row_vec(i);
      Vec logs(k);
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t g = 0; g < k; ++g) {
        logs[g] = std::log(std::max(weights[g], 1e-300)) + cur.comps[g].log_density(x);
        hi = std::max(hi, logs[g]);
      }
      double denom = 0.0;
      for (std::size_t g = 0; g < k; ++g) denom += std::exp(logs[g] - hi);
      ll += hi + std::log(denom);
      for (std::size_t g = 0; g < k; ++g) resp(i, g) = std::exp(logs[g] - hi) / denom;
    }
    ll /= static_cast<double>(n);
    if (report) report->log_likelihood_per_iter.push_back(ll);

    // M-step
    for (std::size_t g = 0; g < k; ++g) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp(i, g);
      if (nk < 1e-8) throw std::runtime_error("em_fit: empty component");
      weights[g] = nk / static_cast<double>(n);
      Vec mu(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += resp(i, g) * data(i, j);
      for (auto& v : mu) v /= nk;
      Mat cov(d, d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = resp(i, g);
        if (w < 1e-14) continue;
        for (std::size_t a = 0; a < d; ++a) {
          const double da = data(i, a) - mu[a];
          for (std::size_t b = a; b < d; ++b)
            cov(a, b) += w * da * (data(i, b) - mu[b]);
        }
      }
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
          cov(a, b) /= nk;
          cov(b, a) = cov(a, b);
        }
        cov(a, a) += reg;
      }
      means[g] = mu;
      covs[g] = cov;
    }

    if (iter > 0 && std::fabs(ll - prev_ll) < 1e-8 * (std::fabs(prev_ll) + 1e-12)) {
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }

  Gmm out;
  out.weights = weights;
  for (std::size_t g = 0; g < k; ++g)
    out.comps.push_back(math::CholeskyGaussian::from_moments(means[g], covs[g]));
  out.validate();
  return out;
}

}  // namespace

Gmm em_fit(const Mat& data, std::size_t num_components, std::uint64_t seed, EmReport* report) {
  if (num_components < 1) throw std::invalid_argument("em_fit: need >= 1 component");
  if (data.rows() < num_components * (data.cols() + 2))
    throw std::invalid_argument("em_fit: too few samples for the requested components");
  for (int attempt = 0; attempt < 5; ++attempt) {
    math::SeededRng rng(seed + static_cast<std::uint64_t>(attempt) * 0x9e37ULL, 77);
    try {
      if (report) report->restarts = attempt;
      return run_em(data, num_components, rng, report);
    } catch (const std::runtime_error&) {
      continue;  // singular component; retry with a fresh seed
    }
  }
  throw std::runtime_error("em_fit: failed after 5 restarts");
}

}  // namespace deterra::gen
