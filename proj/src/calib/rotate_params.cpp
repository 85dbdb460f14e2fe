#include <string>

#include "pals/calib/rotation.hpp"
#include "pals/core/errors.hpp"
#include "pals/core/symmetric.hpp"

namespace pals {

namespace {

void require_rotatable(BasisKind kind) {
  if (kind == BasisKind::cholesky) {
    throw UnsupportedKindError("rotation of cholesky-kind parameters is not defined");
  }
}

}  // namespace

ParameterVector rotate_params(const ParameterVector& params, const AcquisitionParams& acq, const Vec3& x_mid) {
  require_rotatable(params.kind());
  const RigidTransform t(acq, x_mid);
  const Mat3& q = t.rotation();
  Eigen::VectorXd out = params.flat();
  const int stride = params.stride();
  for (int i = 0; i < params.size(); ++i) {
    const Eigen::Index o = params.offset(i);
    out.segment<3>(o + stride - 3) = t.apply(params.center(i));
    if (params.kind() == BasisKind::ellipsoidal) {
      const Mat3 b = unpack_symmetric(params.shape_tril(i));
      out.segment<6>(o + 1) = tril_select(vec(q * b * q.transpose()));
    }
  }
  return ParameterVector::from_flat(params.kind(), std::span<const double>(out.data(), static_cast<std::size_t>(out.size())),
                                    params.eps_norm());
}

Eigen::Matrix<double, 6, 6> rotation_shape_block(const Mat3& q) {
  Eigen::Matrix<double, 9, 9> kron;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) kron.block<3, 3>(3 * a, 3 * b) = q(a, b) * q;
  }
  const Eigen::Matrix<double, 9, 6> kp = kron * duplication_matrix();
  return tril_select_rows(kp);
}

Eigen::MatrixXd rot_jacobian_params(const ParameterVector& params, int basis, const AcquisitionParams& acq,
                                    const Vec3& x_mid) {
  require_rotatable(params.kind());
  (void)basis;
  (void)x_mid;
  const int stride = params.stride();
  const Mat3 q = rotation_matrix(acq.theta, acq.phi);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(stride, stride);
  j(0, 0) = 1.0;
  if (params.kind() == BasisKind::spherical) {
    j(1, 1) = 1.0;
  } else {
    j.block<6, 6>(1, 1) = rotation_shape_block(q);
  }
  j.block<3, 3>(stride - 3, stride - 3) = q;
  return j;
}

Eigen::MatrixXd rot_jacobian_acq(const ParameterVector& params, int basis, const AcquisitionParams& acq,
                                 const Vec3& x_mid) {
  const int stride = params.stride();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(stride, stride + 5);
  j.leftCols(stride) = rot_jacobian_params(params, basis, acq, x_mid);
  const Mat3 q = rotation_matrix(acq.theta, acq.phi);
  const RotationDerivs dq = rotation_matrix_derivs(acq.theta, acq.phi);
  const Vec3 rel = params.center(basis) - x_mid;
  j.block<3, 1>(stride - 3, stride) = dq.d_theta * rel;
  j.block<3, 1>(stride - 3, stride + 1) = dq.d_phi * rel;
  j.block<3, 3>(stride - 3, stride + 2) = Mat3::Identity();
  if (params.kind() == BasisKind::ellipsoidal) {
    const Mat3 b = unpack_symmetric(params.shape_tril(basis));
    const Mat3 qb = q * b;
    j.block<6, 1>(1, stride) = tril_select(vec(qb * dq.d_theta.transpose() + dq.d_theta * b * q.transpose()));
    j.block<6, 1>(1, stride + 1) = tril_select(vec(qb * dq.d_phi.transpose() + dq.d_phi * b * q.transpose()));
  }
  return j;
}

}  // namespace pals
