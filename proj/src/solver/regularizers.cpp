#include "pals/solver/regularizers.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "pals/core/errors.hpp"
#include "pals/core/symmetric.hpp"

namespace pals {

namespace {

void require_same_length(const Eigen::VectorXd& m, const Eigen::VectorXd& anchor) {
  if (m.size() != anchor.size()) {
    throw ContractError("tikhonov: length " + std::to_string(m.size()) + " vs anchor " + std::to_string(anchor.size()));
  }
}

Mat3 checked_b(const ParameterVector& params, int i) {
  const Mat3 b = unpack_symmetric(params.shape_tril(i));
  const double det = b.determinant();
  if (!(det > 0.0)) {
    throw BarrierViolation("log-det barrier: det(B_" + std::to_string(i) + ") = " + std::to_string(det) + " <= 0");
  }
  return b;
}

void require_ellipsoidal(const ParameterVector& params) {
  if (params.kind() != BasisKind::ellipsoidal) throw UnsupportedKindError("log-det barrier needs ellipsoidal bases");
}

}  // namespace

double iterated_tikhonov_value(const Eigen::VectorXd& m, const Eigen::VectorXd& anchor, double lambda) {
  require_same_length(m, anchor);
  return lambda * (m - anchor).squaredNorm();
}

Penalty iterated_tikhonov(const Eigen::VectorXd& m, const Eigen::VectorXd& anchor, double lambda) {
  require_same_length(m, anchor);
  Penalty p;
  p.value = lambda * (m - anchor).squaredNorm();
  p.gradient = 2.0 * lambda * (m - anchor);
  p.hessian = 2.0 * lambda * Eigen::MatrixXd::Identity(m.size(), m.size());
  return p;
}

double logdet_barrier_value(const ParameterVector& params, double weight) {
  require_ellipsoidal(params);
  double v = 0.0;
  for (int i = 0; i < params.size(); ++i) v -= std::log(checked_b(params, i).determinant());
  return weight * v;
}

Penalty logdet_barrier(const ParameterVector& params, double weight) {
  require_ellipsoidal(params);
  const Eigen::Index n = params.flat_size();
  Penalty p;
  p.gradient = Eigen::VectorXd::Zero(n);
  p.hessian = Eigen::MatrixXd::Zero(n, n);
  const Eigen::Matrix<double, 9, 6> dup = duplication_matrix();
  for (int i = 0; i < params.size(); ++i) {
    const Mat3 b = checked_b(params, i);
    const Mat3 b_inv = b.inverse();
    p.value -= std::log(b.determinant());
    const Eigen::Index o = params.offset(i) + 1;
    // d log det B = tr(B^-1 dB); second derivative -tr(B^-1 dB B^-1 dB).
    p.gradient.segment<6>(o) = -weight * (dup.transpose() * vec(b_inv));
    Eigen::Matrix<double, 9, 9> kron;
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) kron.block<3, 3>(3 * a, 3 * c) = b_inv(a, c) * b_inv;
    }
    p.hessian.block<6, 6>(o, o) = weight * (dup.transpose() * kron * dup);
  }
  p.value *= weight;
  return p;
}

}  // namespace pals
