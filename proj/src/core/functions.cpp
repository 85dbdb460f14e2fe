#include "pals/core/functions.hpp"

#include <cmath>
#include <string>

#include "pals/core/errors.hpp"
#include "pals/simd/scalar_math.hpp"

namespace pals {

void HeavisideConfig::validate() const {
  if (!(eps > 0.0) || !(eps < delta)) {
    throw ConfigError("heaviside: require 0 < eps < delta (got delta=" + std::to_string(delta) +
                      ", eps=" + std::to_string(eps) + ")");
  }
  if (!std::isfinite(offset)) throw ConfigError("heaviside: offset must be finite");
}

WendlandOrder wendland_order_from_int(int order) {
  if (order < 0 || order > 3) throw ConfigError("wendland order must be 0..3, got " + std::to_string(order));
  return static_cast<WendlandOrder>(order);
}

double wendland_eval(WendlandOrder order, double r) {
  if (!(r >= 0.0)) throw DomainError("wendland_eval: radius must be nonnegative");
  if (r >= 1.0) return 0.0;
  return simd::wendland_inside(order, r).value;
}

double wendland_deriv(WendlandOrder order, double r) {
  if (!(r >= 0.0)) throw DomainError("wendland_deriv: radius must be nonnegative");
  if (r >= 1.0) return 0.0;
  return simd::wendland_inside(order, r).slope;
}

double heaviside_eval(const HeavisideConfig& cfg, double x) {
  return simd::heaviside_scalar(simd::HeavisideParams::from(cfg), x).value;
}

double heaviside_deriv(const HeavisideConfig& cfg, double x) {
  return simd::heaviside_scalar(simd::HeavisideParams::from(cfg), x).slope;
}

double pseudo_norm(const Vec3& v, double eps_norm) {
  if (!(eps_norm > 0.0)) throw DomainError("pseudo_norm: eps_norm must be positive");
  return std::sqrt(v.squaredNorm() + eps_norm);
}

double pseudo_norm_B(const Vec3& v, const Mat3& B, double eps_norm) {
  if (!(eps_norm > 0.0)) throw DomainError("pseudo_norm_B: eps_norm must be positive");
  const double q = v.dot(B * v);
  if (q < 0.0) throw DomainError("pseudo_norm_B: v^T B v < 0, B is not positive semidefinite");
  return std::sqrt(q + eps_norm);
}

}  // namespace pals
