#include <cmath>

#include "kernels_internal.hpp"

namespace pals::simd::detail {
namespace {

void accumulate_row_scalar(const RowArgs& a, std::span<double> sums) {
  for (std::size_t n = 0; n < sums.size(); ++n) {
    const double x = a.x0 + (static_cast<double>(a.i_begin + static_cast<int>(n)) + 0.5) * a.hx;
    const double zx = x - a.cx;
    const double q = quad_value(a.form, a.coeffs, zx);
    const double r = std::sqrt(q + a.eps_norm);
    if (r < 1.0) {
      sums[n] += a.alpha * wendland_inside(a.order, r).value;
    }
  }
}

void basis_row_scalar(const RowArgs& a, std::span<double> radius, std::span<double> psi,
                      std::span<double> dpsi) {
  for (std::size_t n = 0; n < radius.size(); ++n) {
    const double x = a.x0 + (static_cast<double>(a.i_begin + static_cast<int>(n)) + 0.5) * a.hx;
    const double zx = x - a.cx;
    const double q = quad_value(a.form, a.coeffs, zx);
    const double r = std::sqrt(q + a.eps_norm);
    radius[n] = r;
    if (r < 1.0) {
      const WendlandValue w = wendland_inside(a.order, r);
      psi[n] = w.value;
      dpsi[n] = w.slope;
    } else {
      psi[n] = 0.0;
      dpsi[n] = 0.0;
    }
  }
}

void heaviside_scalar_kernel(const HeavisideParams& h, std::span<const double> sums, std::span<double> values,
                             std::span<double> slopes) {
  for (std::size_t n = 0; n < sums.size(); ++n) {
    const HeavisideValue v = heaviside_scalar(h, sums[n]);
    values[n] = v.value;
    slopes[n] = v.slope;
  }
}

}  // namespace

const KernelTable kScalarKernels{Isa::scalar, &accumulate_row_scalar, &basis_row_scalar, &heaviside_scalar_kernel};

}  // namespace pals::simd::detail
