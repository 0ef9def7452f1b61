#include "kernels/kernels_detail.hpp"

namespace deterra::kern {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq_s(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sq_dist_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void gemv_s(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_s(a + i * cols, x, cols);
}

void gemv_t_s(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy_s(x[i], a + i * cols, y, cols);
}

void gemm_nn_s(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) axpy_s(ai[p], b + p * n, ci, n);
  }
}

void gemm_tn_s(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  // a is k x m
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy_s(ap[i], bp, c + i * n, n);
  }
}

void gemm_nt_s(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  // b is n x k
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += dot_s(ai, b + j * k, k);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{dot_s,    axpy_s,    sum_sq_s,  sq_dist_s, gemv_s,
                             gemv_t_s, gemm_nn_s, gemm_tn_s, gemm_nt_s};
  return t;
}

}  // namespace deterra::kern
