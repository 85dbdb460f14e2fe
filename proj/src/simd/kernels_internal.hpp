#pragma once

#include "pals/simd/kernels.hpp"

namespace pals::simd::detail {

extern const KernelTable kScalarKernels;
#if defined(PALS_HAVE_AVX2_KERNELS)
extern const KernelTable kAvx2Kernels;
#endif

}  // namespace pals::simd::detail
