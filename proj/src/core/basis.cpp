#include "pals/core/basis.hpp"

#include <cmath>
#include <string>

#include "pals/core/errors.hpp"
#include "pals/core/symmetric.hpp"

namespace pals {

std::string_view kind_name(BasisKind kind) {
  switch (kind) {
    case BasisKind::spherical:
      return "spherical";
    case BasisKind::ellipsoidal:
      return "ellipsoidal";
    case BasisKind::cholesky:
      return "cholesky";
  }
  return "unknown";
}

BasisKind kind_from_name(std::string_view name) {
  if (name == "spherical") return BasisKind::spherical;
  if (name == "ellipsoidal") return BasisKind::ellipsoidal;
  if (name == "cholesky") return BasisKind::cholesky;
  throw ConfigError("unknown basis kind '" + std::string(name) + "'");
}

SphericalBasis::SphericalBasis(double alpha_, double beta_, Vec3 xi_) : alpha(alpha_), beta(beta_), xi(std::move(xi_)) {
  if (!(beta > 0.0)) throw DomainError("spherical basis: beta must be positive");
}

EllipsoidBasis::EllipsoidBasis(double alpha_, const Vec6& b, Vec3 xi_) : alpha(alpha_), b_tril(b), xi(std::move(xi_)) {}

EllipsoidBasis::EllipsoidBasis(double alpha_, const Mat3& b, Vec3 xi_)
    : alpha(alpha_), b_tril(pack_lower(0.5 * (b + b.transpose()))), xi(std::move(xi_)) {}

Mat3 EllipsoidBasis::matrix() const { return unpack_symmetric(b_tril); }

CholeskyBasis::CholeskyBasis(double alpha_, const Vec6& l, Vec3 xi_) : alpha(alpha_), l_tril(l), xi(std::move(xi_)) {
  if (!(l[0] > 0.0 && l[3] > 0.0 && l[5] > 0.0)) {
    throw DomainError("cholesky basis: diagonal of L must be strictly positive");
  }
}

Mat3 CholeskyBasis::factor() const { return unpack_lower(l_tril); }

ParameterVector::ParameterVector(BasisKind kind, double eps_norm) : kind_(kind), eps_norm_(eps_norm) {
  if (!(eps_norm > 0.0)) throw ConfigError("eps_norm must be positive");
}

ParameterVector ParameterVector::from_flat(BasisKind kind, std::span<const double> flat, double eps_norm) {
  ParameterVector pv(kind, eps_norm);
  if (flat.size() % static_cast<std::size_t>(pv.stride()) != 0) {
    throw ContractError("parameter vector length " + std::to_string(flat.size()) + " is not a multiple of " +
                        std::to_string(pv.stride()));
  }
  pv.data_ = Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
  return pv;
}

void ParameterVector::require_kind(BasisKind k) const {
  if (k != kind_) {
    throw UnsupportedKindError("basis kind mismatch: vector holds " + std::string(kind_name(kind_)) + ", got " +
                               std::string(kind_name(k)));
  }
}

void ParameterVector::append(std::span<const double> values) {
  const Eigen::Index old = data_.size();
  data_.conservativeResize(old + static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) data_[old + static_cast<Eigen::Index>(k)] = values[k];
}

void ParameterVector::add(const SphericalBasis& b) {
  require_kind(BasisKind::spherical);
  const double v[5] = {b.alpha, b.beta, b.xi.x(), b.xi.y(), b.xi.z()};
  append(v);
}

void ParameterVector::add(const EllipsoidBasis& b) {
  require_kind(BasisKind::ellipsoidal);
  double v[10] = {b.alpha};
  for (int k = 0; k < 6; ++k) v[1 + k] = b.b_tril[k];
  for (int k = 0; k < 3; ++k) v[7 + k] = b.xi[k];
  append(v);
}

void ParameterVector::add(const CholeskyBasis& b) {
  require_kind(BasisKind::cholesky);
  double v[10] = {b.alpha};
  for (int k = 0; k < 6; ++k) v[1 + k] = b.l_tril[k];
  for (int k = 0; k < 3; ++k) v[7 + k] = b.xi[k];
  append(v);
}

SphericalBasis ParameterVector::spherical(int i) const {
  require_kind(BasisKind::spherical);
  const Eigen::Index o = offset(i);
  return SphericalBasis(data_[o], data_[o + 1], data_.segment<3>(o + 2));
}

EllipsoidBasis ParameterVector::ellipsoid(int i) const {
  require_kind(BasisKind::ellipsoidal);
  const Eigen::Index o = offset(i);
  return EllipsoidBasis(data_[o], Vec6(data_.segment<6>(o + 1)), data_.segment<3>(o + 7));
}

CholeskyBasis ParameterVector::cholesky(int i) const {
  require_kind(BasisKind::cholesky);
  const Eigen::Index o = offset(i);
  return CholeskyBasis(data_[o], Vec6(data_.segment<6>(o + 1)), data_.segment<3>(o + 7));
}

Vec6 ParameterVector::shape_tril(int i) const {
  if (kind_ == BasisKind::spherical) throw UnsupportedKindError("spherical bases have no packed shape matrix");
  return data_.segment<6>(offset(i) + 1);
}

Mat3 ParameterVector::form_matrix(int i) const {
  switch (kind_) {
    case BasisKind::spherical: {
      const double beta = data_[offset(i) + 1];
      return Mat3::Identity() * (beta * beta);
    }
    case BasisKind::ellipsoidal:
      return unpack_symmetric(shape_tril(i));
    case BasisKind::cholesky: {
      const Mat3 l = unpack_lower(shape_tril(i));
      return l * l.transpose();
    }
  }
  return Mat3::Zero();
}

simd::QuadForm ParameterVector::quad_form(int i) const {
  const Mat3 a = form_matrix(i);
  return {a(0, 0), a(1, 0), a(2, 0), a(1, 1), a(2, 1), a(2, 2)};
}

bool ParameterVector::operator==(const ParameterVector& other) const {
  return kind_ == other.kind_ && eps_norm_ == other.eps_norm_ && data_.size() == other.data_.size() &&
         data_ == other.data_;
}

}  // namespace pals
