#include "kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels/kernels_detail.hpp"

namespace deterra::kern {
namespace {

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::kScalar};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void install(Backend b) {
  if (b == Backend::kAvx2 && avx2_supported()) {
    g_table.store(&avx2_table(), std::memory_order_relaxed);
    g_backend.store(Backend::kAvx2, std::memory_order_relaxed);
  } else {
    g_table.store(&scalar_table(), std::memory_order_relaxed);
    g_backend.store(Backend::kScalar, std::memory_order_relaxed);
  }
}

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_relaxed);
  if (t == nullptr) {
    Backend pick = cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
    if (const char* env = std::getenv("DETERRA_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) pick = Backend::kScalar;
      if (std::strcmp(env, "avx2") == 0) pick = Backend::kAvx2;
    }
    install(pick);
    t = g_table.load(std::memory_order_relaxed);
  }
  return *t;
}

}  // namespace

bool avx2_supported() { return cpu_has_avx2(); }

Backend active_backend() {
  table();
  return g_backend.load(std::memory_order_relaxed);
}

const char* backend_name() {
  return active_backend() == Backend::kAvx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) { install(b); }

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  table().axpy(alpha, x, y, n);
}
double sum_sq(const double* x, std::size_t n) { return table().sum_sq(x, n); }
double sq_dist(const double* a, const double* b, std::size_t n) {
  return table().sq_dist(a, b, n);
}
void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  table().gemv(a, rows, cols, x, y);
}
void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  table().gemv_t(a, rows, cols, x, y);
}
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  table().gemm_nn(a, b, c, m, k, n);
}
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  table().gemm_tn(a, b, c, m, k, n);
}
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  table().gemm_nt(a, b, c, m, k, n);
}

}  // namespace deterra::kern
