#pragma once

#include <cstddef>

namespace deterra::kern {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum_sq)(const double*, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
  void (*gemv)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*gemv_t)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*gemm_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
  void (*gemm_tn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
  void (*gemm_nt)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();  // valid only when avx2_supported()

}  // namespace deterra::kern
