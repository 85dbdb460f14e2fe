#pragma once

// Scalar reference arithmetic shared by the public functions, the scalar
// kernels and the point evaluator. The AVX2 kernels replicate these
// expressions operation for operation; keep the two in sync.

#include <cmath>

#include "pals/core/functions.hpp"

namespace pals::simd {

struct WendlandValue {
  double value;
  double slope;
};

/// psi and psi' for 0 <= r < 1 (no support test).
inline WendlandValue wendland_inside(WendlandOrder order, double r) {
  const double t = 1.0 - r;
  switch (order) {
    case WendlandOrder::psi0:
      return {t * t, -2.0 * t};
    case WendlandOrder::psi1: {
      const double t2 = t * t;
      const double t4 = t2 * t2;
      return {t4 * (4.0 * r + 1.0), (-20.0 * r) * (t2 * t)};
    }
    case WendlandOrder::psi2: {
      const double t2 = t * t;
      const double t4 = t2 * t2;
      const double t6 = t4 * t2;
      const double poly = ((35.0 * r + 18.0) * r + 3.0) * (1.0 / 3.0);
      return {t6 * poly, ((-56.0 / 3.0) * r) * (5.0 * r + 1.0) * (t4 * t)};
    }
    case WendlandOrder::psi3: {
      const double t2 = t * t;
      const double t4 = t2 * t2;
      const double t8 = t4 * t4;
      const double poly = ((32.0 * r + 25.0) * r + 8.0) * r + 1.0;
      return {t8 * poly, (-22.0 * r) * ((16.0 * r + 7.0) * r + 1.0) * (t4 * t2 * t)};
    }
  }
  return {0.0, 0.0};
}

/// Precomputed knees and slopes of sigma_{delta,eps}.
struct HeavisideParams {
  double offset;
  double lo_outer;  // -delta - eps
  double lo_inner;  // -delta + eps
  double hi_inner;  //  delta - eps
  double hi_outer;  //  delta + eps
  double delta;
  double quad;      // 1 / (8 delta eps)
  double quad_slope;  // 1 / (4 delta eps)
  double lin;       // 1 / (2 delta)

  static HeavisideParams from(const HeavisideConfig& cfg) {
    const double d = cfg.delta;
    const double e = cfg.eps;
    return {cfg.offset, -d - e, -d + e, d - e, d + e, d, 1.0 / (8.0 * d * e), 1.0 / (4.0 * d * e),
            1.0 / (2.0 * d)};
  }
};

struct HeavisideValue {
  double value;
  double slope;
};

inline HeavisideValue heaviside_scalar(const HeavisideParams& h, double s) {
  const double x = s - h.offset;
  double v;
  double dv;
  if (x < h.lo_outer) {
    v = 0.0;
    dv = 0.0;
  } else if (x < h.lo_inner) {
    const double t = x - h.lo_outer;
    v = t * t * h.quad;
    dv = t * h.quad_slope;
  } else if (x < h.hi_inner) {
    v = (x + h.delta) * h.lin;
    dv = h.lin;
  } else if (x < h.hi_outer) {
    const double t = h.hi_outer - x;
    v = 1.0 - t * t * h.quad;
    dv = t * h.quad_slope;
  } else {
    v = 1.0;
    dv = 0.0;
  }
  v = std::fmin(1.0, std::fmax(0.0, v));
  return {v, dv};
}

/// Row-invariant part of the quadratic form z^T A z for fixed (z_y, z_z):
/// z^T A z = z_x (a11 z_x + c1) + c0.
struct RowCoefficients {
  double c0;
  double c1;
};

/// Symmetric 3x3 form stored by its lower triangle.
struct QuadForm {
  double a11, a21, a31, a22, a32, a33;
};

inline RowCoefficients row_coefficients(const QuadForm& a, double zy, double zz) {
  const double c1 = 2.0 * (a.a21 * zy + a.a31 * zz);
  const double c0 = zy * (a.a22 * zy + 2.0 * a.a32 * zz) + a.a33 * zz * zz;
  return {c0, c1};
}

inline double quad_value(const QuadForm& a, const RowCoefficients& rc, double zx) {
  return zx * (a.a11 * zx + rc.c1) + rc.c0;
}

}  // namespace pals::simd
