#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pals/core/basis.hpp"
#include "pals/core/types.hpp"

namespace pals {

/// Pose of one experiment: azimuth theta, polar phi (radians) and a shift b.
struct AcquisitionParams {
  double theta = 0.0;
  double phi = 0.0;
  Vec3 b = Vec3::Zero();

  static constexpr int kSize = 5;
  Eigen::Matrix<double, 5, 1> flat() const;
  static AcquisitionParams from_flat(std::span<const double> v);
  bool operator==(const AcquisitionParams& other) const;
};

/// Q(theta, phi) = R_y(phi) R_z(theta).
Mat3 rotation_matrix(double theta, double phi);

struct RotationDerivs {
  Mat3 d_theta;
  Mat3 d_phi;
};
RotationDerivs rotation_matrix_derivs(double theta, double phi);

/// T(x) = Q (x - x_mid) + b + x_mid.
class RigidTransform {
 public:
  RigidTransform(const AcquisitionParams& acq, const Vec3& x_mid);

  const AcquisitionParams& acq() const { return acq_; }
  const Vec3& x_mid() const { return x_mid_; }
  const Mat3& rotation() const { return q_; }

  Vec3 apply(const Vec3& x) const;
  Vec3 inverse(const Vec3& x) const;

 private:
  AcquisitionParams acq_;
  Vec3 x_mid_;
  Mat3 q_;
};

inline Vec3 transform_apply(const RigidTransform& t, const Vec3& x) { return t.apply(x); }
inline Vec3 transform_inverse(const RigidTransform& t, const Vec3& x) { return t.inverse(x); }

/// PaLS parameters of the transformed object: centers move by T, ellipsoid
/// shapes become Q B Q^T. Cholesky kind throws UnsupportedKindError.
ParameterVector rotate_params(const ParameterVector& params, const AcquisitionParams& acq, const Vec3& x_mid);

/// d rot(m_i) / d m_i for one basis (stride x stride).
Eigen::MatrixXd rot_jacobian_params(const ParameterVector& params, int basis, const AcquisitionParams& acq,
                                    const Vec3& x_mid);
/// [d rot / d m_i | d rot / d (theta, phi, b)] (stride x (stride + 5)).
Eigen::MatrixXd rot_jacobian_acq(const ParameterVector& params, int basis, const AcquisitionParams& acq,
                                 const Vec3& x_mid);

/// Shape block of the ellipsoid rotation: packed B -> packed Q B Q^T.
Eigen::Matrix<double, 6, 6> rotation_shape_block(const Mat3& q);

/// PaLS parameters followed by one acquisition block per experiment.
struct ExtendedParameters {
  ParameterVector pals;
  std::vector<AcquisitionParams> acq;

  explicit ExtendedParameters(ParameterVector p, std::vector<AcquisitionParams> a = {})
      : pals(std::move(p)), acq(std::move(a)) {}

  Eigen::Index pals_size() const { return pals.flat_size(); }
  Eigen::Index size() const { return pals.flat_size() + AcquisitionParams::kSize * static_cast<Eigen::Index>(acq.size()); }
  Eigen::Index acq_offset(int experiment) const { return pals.flat_size() + AcquisitionParams::kSize * experiment; }

  Eigen::VectorXd flat() const;
  /// Replaces all values; `flat` must have the current layout.
  void assign(const Eigen::VectorXd& flat);
};

}  // namespace pals
