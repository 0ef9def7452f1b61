#include "mathcore/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kernels/kernels.hpp"

namespace deterra::math {
namespace {

double kernel_block_sum(const Mat& a, const Mat& b, double gamma) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j)
      acc += std::exp(-gamma * kern::sq_dist(ai, b.row(j), a.cols()));
  }
  return acc;
}

}  // namespace

double mmd_sq(const Mat& x, const Mat& y, double bandwidth) {
  if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("mmd_sq: empty sample set");
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("mmd_sq: sample shapes must match");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_sq: bandwidth must be positive");
  const double n = static_cast<double>(x.rows());
  const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
  const double xx = kernel_block_sum(x, x, gamma) / (n * n);
  const double yy = kernel_block_sum(y, y, gamma) / (n * n);
  const double xy = kernel_block_sum(x, y, gamma) / (n * n);
  return xx + yy - 2.0 * xy;
}

double median_heuristic_bandwidth(const Mat& x, const Mat& y) {
  std::vector<double> dists;
  const std::size_t nx = x.rows(), ny = y.rows();
  const std::size_t total = nx + ny;
  dists.reserve(total * (total - 1) / 2);
  auto row_at = [&](std::size_t i) { return i < nx ? x.row(i) : y.row(i - nx); };
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i + 1; j < total; ++j)
      dists.push_back(std::sqrt(kern::sq_dist(row_at(i), row_at(j), x.cols())));
  if (dists.empty()) return 1.0;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  const double med = dists[mid];
  return med > 1e-12 ? med : 1.0;
}

}  // namespace deterra::math
