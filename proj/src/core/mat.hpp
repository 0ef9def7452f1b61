#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace deterra {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  Vec row_vec(std::size_t i) const {
    return Vec(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }
  void set_row(std::size_t i, const Vec& v) {
    assert(v.size() == cols_);
    std::copy(v.begin(), v.end(), data_.begin() + i * cols_);
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// y = A x
Vec matvec(const Mat& a, const Vec& x);
// y = A^T x
Vec matvec_t(const Mat& a, const Vec& x);
// C = A B
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& a);
void add_scaled(Vec& y, double alpha, const Vec& x);  // y += alpha x

}  // namespace deterra
