#pragma once

#include "pals/core/types.hpp"

namespace pals {

/// Default floor of the pseudo-norm sqrt(|v|^2 + eps).
inline constexpr double kDefaultEpsNorm = 1e-4;

/// Piecewise-polynomial Heaviside sigma_{delta,eps}, applied to (x - offset).
///
/// `offset` shifts the level at which the RBF sum crosses one half. With the
/// default 0 an empty parameter vector evaluates to sigma(0) = 0.5 everywhere;
/// zero_background() moves the lower knee to 0 so that space outside every
/// basis support reads exactly 0 with zero slope.
struct HeavisideConfig {
  double delta = 0.1;
  double eps = 0.01;
  double offset = 0.0;

  static HeavisideConfig zero_background(double delta = 0.1, double eps = 0.01) {
    return {delta, eps, delta + eps};
  }

  /// Throws ConfigError unless 0 < eps < delta.
  void validate() const;
};

/// Order of the Wendland compactly supported RBF psi_k; support is r < 1.
enum class WendlandOrder : int { psi0 = 0, psi1 = 1, psi2 = 2, psi3 = 3 };

WendlandOrder wendland_order_from_int(int order);

/// psi_order(r). Throws DomainError for r < 0 (or NaN).
double wendland_eval(WendlandOrder order, double r);
/// d psi / dr, zero for r >= 1.
double wendland_deriv(WendlandOrder order, double r);

double heaviside_eval(const HeavisideConfig& cfg, double x);
double heaviside_deriv(const HeavisideConfig& cfg, double x);

/// sqrt(|v|^2 + eps_norm).
double pseudo_norm(const Vec3& v, double eps_norm = kDefaultEpsNorm);
/// sqrt(v^T B v + eps_norm); DomainError when v^T B v < 0.
double pseudo_norm_B(const Vec3& v, const Mat3& B, double eps_norm = kDefaultEpsNorm);

}  // namespace pals
