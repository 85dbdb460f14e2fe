#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

#include "pals/core/functions.hpp"
#include "pals/core/types.hpp"
#include "pals/simd/scalar_math.hpp"

namespace pals {

enum class BasisKind { spherical, ellipsoidal, cholesky };

std::string_view kind_name(BasisKind kind);
BasisKind kind_from_name(std::string_view name);

/// Parameters per basis function: 5 for spherical, 10 otherwise.
constexpr int basis_stride(BasisKind kind) { return kind == BasisKind::spherical ? 5 : 10; }

/// alpha * psi(|beta (x - xi)|), support radius 1/beta.
struct SphericalBasis {
  double alpha;
  double beta;
  Vec3 xi;

  SphericalBasis(double alpha, double beta, Vec3 xi);
};

/// alpha * psi(|x - xi|_B) with B symmetric, packed as B1..B6.
struct EllipsoidBasis {
  double alpha;
  Vec6 b_tril;
  Vec3 xi;

  EllipsoidBasis(double alpha, const Vec6& b_tril, Vec3 xi);
  EllipsoidBasis(double alpha, const Mat3& b, Vec3 xi);
  Mat3 matrix() const;
};

/// alpha * psi(|L^T (x - xi)|) with lower-triangular L (positive diagonal).
struct CholeskyBasis {
  double alpha;
  Vec6 l_tril;
  Vec3 xi;

  CholeskyBasis(double alpha, const Vec6& l_tril, Vec3 xi);
  Mat3 factor() const;
};

/// The PaLS unknowns m: n_RBF bases of one kind, stored flat as
/// [alpha, shape..., xi_x, xi_y, xi_z] per basis.
class ParameterVector {
 public:
  explicit ParameterVector(BasisKind kind, double eps_norm = kDefaultEpsNorm);
  /// Throws ContractError when the length is not a multiple of the stride.
  static ParameterVector from_flat(BasisKind kind, std::span<const double> flat, double eps_norm = kDefaultEpsNorm);

  BasisKind kind() const { return kind_; }
  int stride() const { return basis_stride(kind_); }
  int size() const { return static_cast<int>(data_.size()) / stride(); }
  bool empty() const { return data_.size() == 0; }
  double eps_norm() const { return eps_norm_; }
  const Eigen::VectorXd& flat() const { return data_; }
  Eigen::Index flat_size() const { return data_.size(); }

  void add(const SphericalBasis& b);
  void add(const EllipsoidBasis& b);
  void add(const CholeskyBasis& b);

  SphericalBasis spherical(int i) const;
  EllipsoidBasis ellipsoid(int i) const;
  CholeskyBasis cholesky(int i) const;

  double alpha(int i) const { return data_[offset(i)]; }
  Vec3 center(int i) const { return data_.segment<3>(offset(i) + stride() - 3); }
  Vec6 shape_tril(int i) const;
  /// The matrix A of the quadratic form z^T A z under the pseudo-norm:
  /// beta^2 I, B, or L L^T.
  Mat3 form_matrix(int i) const;
  simd::QuadForm quad_form(int i) const;

  Eigen::Index offset(int i) const { return static_cast<Eigen::Index>(i) * stride(); }

  bool operator==(const ParameterVector& other) const;

 private:
  BasisKind kind_;
  double eps_norm_;
  Eigen::VectorXd data_;

  void require_kind(BasisKind k) const;
  void append(std::span<const double> values);
};

}  // namespace pals
