#pragma once

#include "sawsim/kernels.hpp"

namespace sawsim::kernels::detail {

struct KernelTable {
  Isa isa;
  void (*pointwise_multiply)(cplx*, const cplx*, std::size_t);
  void (*masked_scale)(cplx*, std::size_t, std::uint64_t, std::uint64_t, cplx);
  void (*hadamard_pairs)(cplx*, std::size_t, unsigned);
  void (*xx_mix_pairs)(cplx*, std::size_t, unsigned, unsigned, double, double);
  cplx (*dot_conjugated)(const cplx*, const cplx*, std::size_t);
  double (*squared_norm)(const cplx*, std::size_t);
};

#if defined(SAWSIM_AVX2_TU)
const KernelTable* avx2_table();
#endif
#if defined(SAWSIM_NEON_TU)
const KernelTable* neon_table();
#endif

}  // namespace sawsim::kernels::detail
