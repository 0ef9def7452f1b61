#include "nn/scaler.hpp"

#include <cmath>
#include <stdexcept>

namespace deterra::nn {

Vec Scaler::apply(const Vec& x) const {
  assert(x.size() == dim());
  Vec y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double span = hi[j] - lo[j];
    y[j] = span > 0.0 ? (2.0 * (x[j] - lo[j]) / span - 1.0) : 0.0;
  }
  return y;
}

Vec Scaler::invert(const Vec& y) const {
  assert(y.size() == dim());
  Vec x(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double span = hi[j] - lo[j];
    x[j] = span > 0.0 ? lo[j] + (y[j] + 1.0) * 0.5 * span : lo[j];
  }
  return x;
}

Mat Scaler::apply_rows(const Mat& x) const {
  Mat y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) y.set_row(i, apply(x.row_vec(i)));
  return y;
}

Mat Scaler::invert_rows(const Mat& y) const {
  Mat x(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.rows(); ++i) x.set_row(i, invert(y.row_vec(i)));
  return x;
}

Scaler fit_scaler(const Mat& data) {
  if (data.rows() == 0 || data.cols() == 0)
    throw std::invalid_argument("fit_scaler: empty dataset");
  Scaler s;
  s.lo.assign(data.cols(), 0.0);
  s.hi.assign(data.cols(), 0.0);
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double lo = data(0, j), hi = data(0, j);
    for (std::size_t i = 1; i < data.rows(); ++i) {
      lo = std::min(lo, data(i, j));
      hi = std::max(hi, data(i, j));
    }
    s.lo[j] = lo;
    s.hi[j] = hi;
  }
  return s;
}

TargetScaler fit_target_scaler(const Vec& y) {
  if (y.empty()) throw std::invalid_argument("fit_target_scaler: empty targets");
  TargetScaler t;
  double acc = 0.0;
  for (double v : y) acc += v;
  t.mean = acc / static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - t.mean) * (v - t.mean);
  var /= static_cast<double>(y.size());
  t.stddev = var > 1e-24 ? std::sqrt(var) : 1.0;
  return t;
}

}  // namespace deterra::nn
