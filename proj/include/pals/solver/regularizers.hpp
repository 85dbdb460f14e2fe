#pragma once

#include <Eigen/Core>

#include "pals/core/basis.hpp"

namespace pals {

/// Value, gradient and Hessian of a smooth penalty.
struct Penalty {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// lambda |m - anchor|^2.
Penalty iterated_tikhonov(const Eigen::VectorXd& m, const Eigen::VectorXd& anchor, double lambda);
double iterated_tikhonov_value(const Eigen::VectorXd& m, const Eigen::VectorXd& anchor, double lambda);

/// -w sum_i log det(B_i) over an ellipsoidal parameter vector; derivatives
/// are with respect to the flat parameters (zero outside the B blocks).
/// BarrierViolation when some det(B_i) <= 0.
Penalty logdet_barrier(const ParameterVector& params, double weight);
double logdet_barrier_value(const ParameterVector& params, double weight);

}  // namespace pals
