// AVX2 variants of the row kernels. Every expression mirrors scalar_math.hpp
// operation for operation (no FMA), so results match the scalar reference
// exactly. Remainder lanes fall back to the scalar code.

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace pals::simd::detail {
namespace {

struct Wendland4 {
  __m256d value;
  __m256d slope;
};

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline Wendland4 wendland_inside4(WendlandOrder order, __m256d r) {
  const __m256d t = _mm256_sub_pd(set1(1.0), r);
  switch (order) {
    case WendlandOrder::psi0:
      return {_mm256_mul_pd(t, t), _mm256_mul_pd(set1(-2.0), t)};
    case WendlandOrder::psi1: {
      const __m256d t2 = _mm256_mul_pd(t, t);
      const __m256d t4 = _mm256_mul_pd(t2, t2);
      const __m256d poly = _mm256_add_pd(_mm256_mul_pd(set1(4.0), r), set1(1.0));
      const __m256d slope = _mm256_mul_pd(_mm256_mul_pd(set1(-20.0), r), _mm256_mul_pd(t2, t));
      return {_mm256_mul_pd(t4, poly), slope};
    }
    case WendlandOrder::psi2: {
      const __m256d t2 = _mm256_mul_pd(t, t);
      const __m256d t4 = _mm256_mul_pd(t2, t2);
      const __m256d t6 = _mm256_mul_pd(t4, t2);
      __m256d poly = _mm256_add_pd(_mm256_mul_pd(set1(35.0), r), set1(18.0));
      poly = _mm256_add_pd(_mm256_mul_pd(poly, r), set1(3.0));
      poly = _mm256_mul_pd(poly, set1(1.0 / 3.0));
      const __m256d lin = _mm256_add_pd(_mm256_mul_pd(set1(5.0), r), set1(1.0));
      __m256d slope = _mm256_mul_pd(_mm256_mul_pd(set1(-56.0 / 3.0), r), lin);
      slope = _mm256_mul_pd(slope, _mm256_mul_pd(t4, t));
      return {_mm256_mul_pd(t6, poly), slope};
    }
    case WendlandOrder::psi3: {
      const __m256d t2 = _mm256_mul_pd(t, t);
      const __m256d t4 = _mm256_mul_pd(t2, t2);
      const __m256d t8 = _mm256_mul_pd(t4, t4);
      __m256d poly = _mm256_add_pd(_mm256_mul_pd(set1(32.0), r), set1(25.0));
      poly = _mm256_add_pd(_mm256_mul_pd(poly, r), set1(8.0));
      poly = _mm256_add_pd(_mm256_mul_pd(poly, r), set1(1.0));
      __m256d quad = _mm256_add_pd(_mm256_mul_pd(set1(16.0), r), set1(7.0));
      quad = _mm256_add_pd(_mm256_mul_pd(quad, r), set1(1.0));
      __m256d slope = _mm256_mul_pd(_mm256_mul_pd(set1(-22.0), r), quad);
      slope = _mm256_mul_pd(slope, _mm256_mul_pd(_mm256_mul_pd(t4, t2), t));
      return {_mm256_mul_pd(t8, poly), slope};
    }
  }
  return {_mm256_setzero_pd(), _mm256_setzero_pd()};
}

/// r for lanes i_begin+n .. i_begin+n+3.
inline __m256d row_radius4(const RowArgs& a, int n) {
  const double base = static_cast<double>(a.i_begin + n);
  const __m256d idx = _mm256_set_pd(base + 3.0, base + 2.0, base + 1.0, base);
  const __m256d x = _mm256_add_pd(set1(a.x0), _mm256_mul_pd(_mm256_add_pd(idx, set1(0.5)), set1(a.hx)));
  const __m256d zx = _mm256_sub_pd(x, set1(a.cx));
  const __m256d inner = _mm256_add_pd(_mm256_mul_pd(set1(a.form.a11), zx), set1(a.coeffs.c1));
  const __m256d q = _mm256_add_pd(_mm256_mul_pd(zx, inner), set1(a.coeffs.c0));
  return _mm256_sqrt_pd(_mm256_add_pd(q, set1(a.eps_norm)));
}

void accumulate_row_avx2(const RowArgs& a, std::span<double> sums) {
  const std::size_t count = sums.size();
  const __m256d alpha = set1(a.alpha);
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const __m256d r = row_radius4(a, static_cast<int>(n));
    const __m256d inside = _mm256_cmp_pd(r, set1(1.0), _CMP_LT_OQ);
    if (_mm256_movemask_pd(inside) == 0) continue;
    const Wendland4 w = wendland_inside4(a.order, r);
    const __m256d old = _mm256_loadu_pd(sums.data() + n);
    const __m256d updated = _mm256_add_pd(old, _mm256_mul_pd(alpha, w.value));
    _mm256_storeu_pd(sums.data() + n, _mm256_blendv_pd(old, updated, inside));
  }
  if (n < count) {
    RowArgs tail = a;
    tail.i_begin = a.i_begin + static_cast<int>(n);
    kScalarKernels.accumulate_row(tail, sums.subspan(n));
  }
}

void basis_row_avx2(const RowArgs& a, std::span<double> radius, std::span<double> psi, std::span<double> dpsi) {
  const std::size_t count = radius.size();
  const __m256d zero = _mm256_setzero_pd();
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const __m256d r = row_radius4(a, static_cast<int>(n));
    const __m256d inside = _mm256_cmp_pd(r, set1(1.0), _CMP_LT_OQ);
    _mm256_storeu_pd(radius.data() + n, r);
    if (_mm256_movemask_pd(inside) == 0) {
      _mm256_storeu_pd(psi.data() + n, zero);
      _mm256_storeu_pd(dpsi.data() + n, zero);
      continue;
    }
    const Wendland4 w = wendland_inside4(a.order, r);
    _mm256_storeu_pd(psi.data() + n, _mm256_blendv_pd(zero, w.value, inside));
    _mm256_storeu_pd(dpsi.data() + n, _mm256_blendv_pd(zero, w.slope, inside));
  }
  if (n < count) {
    RowArgs tail = a;
    tail.i_begin = a.i_begin + static_cast<int>(n);
    kScalarKernels.basis_row(tail, radius.subspan(n), psi.subspan(n), dpsi.subspan(n));
  }
}

void heaviside_avx2(const HeavisideParams& h, std::span<const double> sums, std::span<double> values,
                    std::span<double> slopes) {
  const std::size_t count = sums.size();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = set1(1.0);
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(sums.data() + n), set1(h.offset));

    const __m256d t1 = _mm256_sub_pd(x, set1(h.lo_outer));
    const __m256d v1 = _mm256_mul_pd(_mm256_mul_pd(t1, t1), set1(h.quad));
    const __m256d d1 = _mm256_mul_pd(t1, set1(h.quad_slope));
    const __m256d v2 = _mm256_mul_pd(_mm256_add_pd(x, set1(h.delta)), set1(h.lin));
    const __m256d d2 = set1(h.lin);
    const __m256d t3 = _mm256_sub_pd(set1(h.hi_outer), x);
    const __m256d v3 = _mm256_sub_pd(one, _mm256_mul_pd(_mm256_mul_pd(t3, t3), set1(h.quad)));
    const __m256d d3 = _mm256_mul_pd(t3, set1(h.quad_slope));

    const __m256d m0 = _mm256_cmp_pd(x, set1(h.lo_outer), _CMP_LT_OQ);
    const __m256d m1 = _mm256_cmp_pd(x, set1(h.lo_inner), _CMP_LT_OQ);
    const __m256d m2 = _mm256_cmp_pd(x, set1(h.hi_inner), _CMP_LT_OQ);
    const __m256d m3 = _mm256_cmp_pd(x, set1(h.hi_outer), _CMP_LT_OQ);

    __m256d v = one;
    __m256d d = zero;
    v = _mm256_blendv_pd(v, v3, m3);
    d = _mm256_blendv_pd(d, d3, m3);
    v = _mm256_blendv_pd(v, v2, m2);
    d = _mm256_blendv_pd(d, d2, m2);
    v = _mm256_blendv_pd(v, v1, m1);
    d = _mm256_blendv_pd(d, d1, m1);
    v = _mm256_blendv_pd(v, zero, m0);
    d = _mm256_blendv_pd(d, zero, m0);
    v = _mm256_min_pd(one, _mm256_max_pd(zero, v));

    _mm256_storeu_pd(values.data() + n, v);
    _mm256_storeu_pd(slopes.data() + n, d);
  }
  if (n < count) {
    kScalarKernels.heaviside(h, sums.subspan(n), values.subspan(n), slopes.subspan(n));
  }
}

}  // namespace

const KernelTable kAvx2Kernels{Isa::avx2, &accumulate_row_avx2, &basis_row_avx2, &heaviside_avx2};

}  // namespace pals::simd::detail
