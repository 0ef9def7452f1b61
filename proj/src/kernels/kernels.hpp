#pragma once

#include <cstddef>

// Data-parallel arithmetic kernels used by the density math and the network
// forward/backward passes. Every kernel has a scalar reference implementation
// and an AVX2 variant; the active backend is chosen once at startup from CPU
// capabilities and can be overridden (DETERRA_SIMD=scalar|avx2 or
// set_backend) for equivalence testing. All matrices are row-major, double
// precision, unaligned loads.
namespace deterra::kern {

enum class Backend { kScalar, kAvx2 };

bool avx2_supported();
Backend active_backend();
const char* backend_name();

// Falls back to scalar when the requested backend is unsupported.
void set_backend(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// sum_i x[i]^2
double sum_sq(const double* x, std::size_t n);
// sum_i (a[i]-b[i])^2
double sq_dist(const double* a, const double* b, std::size_t n);
// y = A x            A: rows x cols
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
// y = A^T x          A: rows x cols, y has length cols
void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
// C += A B           A: m x k, B: k x n, C: m x n
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
// C += A^T B         A: k x m, B: k x n, C: m x n
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);
// C += A B^T         A: m x k, B: n x k, C: m x n
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

}  // namespace deterra::kern
