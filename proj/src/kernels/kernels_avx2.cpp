#include "kernels/kernels_detail.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace deterra::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

double dot_v(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq_v(const double* x, std::size_t n) { return dot_v(x, x, n); }

double sq_dist_v(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void gemv_v(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot_v(a + i * cols, x, cols);
}

void gemv_t_v(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy_v(x[i], a + i * cols, y, cols);
}

// Blocked C += A B core with a 6x8 register micro-kernel. The k-accumulation
// stays sequential per C element, so results match the scalar reference up to
// FMA contraction only.
template <int Rows>
inline void micro_kernel(const double* a, std::size_t lda, const double* b, std::size_t n,
                         std::size_t k, double* c, std::size_t ldc) {
  __m256d acc[Rows][2];
  for (int r = 0; r < Rows; ++r) {
    acc[r][0] = _mm256_loadu_pd(c + r * ldc);
    acc[r][1] = _mm256_loadu_pd(c + r * ldc + 4);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * n);
    const __m256d b1 = _mm256_loadu_pd(b + p * n + 4);
    for (int r = 0; r < Rows; ++r) {
      const __m256d va = _mm256_set1_pd(a[r * lda + p]);
      acc[r][0] = _mm256_fmadd_pd(va, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(va, b1, acc[r][1]);
    }
  }
  for (int r = 0; r < Rows; ++r) {
    _mm256_storeu_pd(c + r * ldc, acc[r][0]);
    _mm256_storeu_pd(c + r * ldc + 4, acc[r][1]);
  }
}

void gemm_core(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  const std::size_t n8 = n - n % 8;
  for (std::size_t j0 = 0; j0 < n8; j0 += 8) {
    std::size_t i = 0;
    for (; i + 6 <= m; i += 6)
      micro_kernel<6>(a + i * k, k, b + j0, n, k, c + i * n + j0, n);
    for (; i + 2 <= m; i += 2)
      micro_kernel<2>(a + i * k, k, b + j0, n, k, c + i * n + j0, n);
    for (; i < m; ++i) micro_kernel<1>(a + i * k, k, b + j0, n, k, c + i * n + j0, n);
  }
  if (n8 < n) {
    for (std::size_t i = 0; i < m; ++i) {
      double* ci = c + i * n;
      const double* ai = a + i * k;
      for (std::size_t j = n8; j < n; ++j) {
        double acc = ci[j];
        for (std::size_t p = 0; p < k; ++p) acc += ai[p] * b[p * n + j];
        ci[j] = acc;
      }
    }
  }
}

thread_local std::vector<double> g_pack;

// out = transpose of src (rows x cols), written as cols x rows
void transpose_into_pack(const double* src, std::size_t rows, std::size_t cols) {
  g_pack.resize(rows * cols);
  constexpr std::size_t kTile = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += kTile)
    for (std::size_t j0 = 0; j0 < cols; j0 += kTile) {
      const std::size_t i1 = std::min(rows, i0 + kTile);
      const std::size_t j1 = std::min(cols, j0 + kTile);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) g_pack[j * rows + i] = src[i * cols + j];
    }
}

void gemm_nn_v(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  gemm_core(a, b, c, m, k, n);
}

void gemm_tn_v(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  // a is k x m; pack its transpose, then run the nn core
  transpose_into_pack(a, k, m);
  gemm_core(g_pack.data(), b, c, m, k, n);
}

void gemm_nt_v(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
  // b is n x k; pack its transpose into k x n
  transpose_into_pack(b, n, k);
  gemm_core(a, g_pack.data(), c, m, k, n);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{dot_v,    axpy_v,    sum_sq_v,  sq_dist_v, gemv_v,
                             gemv_t_v, gemm_nn_v, gemm_tn_v, gemm_nt_v};
  return t;
}

}  // namespace deterra::kern

#else

namespace deterra::kern {
const KernelTable& avx2_table() { return scalar_table(); }
}  // namespace deterra::kern

#endif
