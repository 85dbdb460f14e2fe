#include "pals/calib/rotation.hpp"

#include <cmath>

#include "pals/core/errors.hpp"

namespace pals {

Eigen::Matrix<double, 5, 1> AcquisitionParams::flat() const {
  Eigen::Matrix<double, 5, 1> v;
  v << theta, phi, b.x(), b.y(), b.z();
  return v;
}

AcquisitionParams AcquisitionParams::from_flat(std::span<const double> v) {
  if (v.size() != static_cast<std::size_t>(kSize)) throw ContractError("acquisition block must have 5 entries");
  return {v[0], v[1], Vec3(v[2], v[3], v[4])};
}

bool AcquisitionParams::operator==(const AcquisitionParams& other) const {
  return theta == other.theta && phi == other.phi && b == other.b;
}

namespace {

Mat3 rot_z(double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Mat3 rot_z_deriv(double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  Mat3 r;
  r << -s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0;
  return r;
}

Mat3 rot_y(double p) {
  const double c = std::cos(p);
  const double s = std::sin(p);
  Mat3 r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Mat3 rot_y_deriv(double p) {
  const double c = std::cos(p);
  const double s = std::sin(p);
  Mat3 r;
  r << -s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s;
  return r;
}

}  // namespace

Mat3 rotation_matrix(double theta, double phi) { return rot_y(phi) * rot_z(theta); }

RotationDerivs rotation_matrix_derivs(double theta, double phi) {
  return {rot_y(phi) * rot_z_deriv(theta), rot_y_deriv(phi) * rot_z(theta)};
}

RigidTransform::RigidTransform(const AcquisitionParams& acq, const Vec3& x_mid)
    : acq_(acq), x_mid_(x_mid), q_(rotation_matrix(acq.theta, acq.phi)) {}

Vec3 RigidTransform::apply(const Vec3& x) const { return q_ * (x - x_mid_) + acq_.b + x_mid_; }

Vec3 RigidTransform::inverse(const Vec3& x) const { return q_.transpose() * (x - x_mid_ - acq_.b) + x_mid_; }

Eigen::VectorXd ExtendedParameters::flat() const {
  Eigen::VectorXd v(size());
  v.head(pals.flat_size()) = pals.flat();
  for (std::size_t j = 0; j < acq.size(); ++j) {
    v.segment<5>(acq_offset(static_cast<int>(j))) = acq[j].flat();
  }
  return v;
}

void ExtendedParameters::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw ContractError("extended parameter vector has the wrong length");
  const Eigen::VectorXd head = flat.head(pals.flat_size());
  pals = ParameterVector::from_flat(pals.kind(), std::span<const double>(head.data(), static_cast<std::size_t>(head.size())),
                                    pals.eps_norm());
  for (std::size_t j = 0; j < acq.size(); ++j) {
    const Eigen::Index o = acq_offset(static_cast<int>(j));
    acq[j] = AcquisitionParams::from_flat(std::span<const double>(flat.data() + o, 5));
  }
}

}  // namespace pals
