#include "core/mat.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "kernels/kernels.hpp"

namespace deterra {

namespace {
// Large activation buffers cycle every minibatch; keeping them inside the
// arena instead of mmap round-trips avoids steady-state page-fault churn.
struct MallocTuning {
  MallocTuning() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
  }
};
const MallocTuning g_malloc_tuning;
}  // namespace

Vec matvec(const Mat& a, const Vec& x) {
  assert(x.size() == a.cols());
  Vec y(a.rows());
  kern::gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  assert(x.size() == a.rows());
  Vec y(a.cols());
  kern::gemv_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows());
  Mat c(a.rows(), b.cols());
  kern::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  return kern::dot(a.data(), b.data(), a.size());
}

double norm_sq(const Vec& a) { return kern::sum_sq(a.data(), a.size()); }

void add_scaled(Vec& y, double alpha, const Vec& x) {
  assert(y.size() == x.size());
  kern::axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace deterra
