#pragma once

// Data-parallel inner loops of the field evaluation, with a scalar reference
// implementation and an AVX2 variant chosen at runtime. Both produce identical
// bits; tests/unit/test_simd.cpp holds them to that.

#include <cstddef>
#include <span>
#include <string_view>

#include "pals/simd/scalar_math.hpp"

namespace pals::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// One x-row of voxels against one basis function.
struct RowArgs {
  double x0;  // grid origin along x
  double hx;  // grid spacing along x
  double cx;  // basis center x
  int i_begin;
  QuadForm form;
  RowCoefficients coeffs;
  double alpha;
  double eps_norm;
  WendlandOrder order;
};

struct KernelTable {
  Isa isa;
  /// sums[n] += alpha * psi(r(i_begin + n)) for n < sums.size().
  void (*accumulate_row)(const RowArgs& args, std::span<double> sums);
  /// radius, psi and psi' along the row; psi = psi' = 0 where r >= 1.
  void (*basis_row)(const RowArgs& args, std::span<double> radius, std::span<double> psi,
                    std::span<double> dpsi);
  /// u = sigma(s - offset), du = sigma'(s - offset).
  void (*heaviside)(const HeavisideParams& params, std::span<const double> sums, std::span<double> values,
                    std::span<double> slopes);
};

bool isa_available(Isa isa);
const KernelTable& kernels_for(Isa isa);

/// Kernels in use. Defaults to the best available ISA; the PALS_SIMD
/// environment variable ("scalar" or "avx2") overrides the choice.
const KernelTable& active_kernels();
void set_active_isa(Isa isa);

}  // namespace pals::simd
