#pragma once

#include <vector>

#include <Eigen/Core>

#include "pals/calib/rotation.hpp"
#include "pals/core/block_jacobian.hpp"
#include "pals/core/field.hpp"

namespace pals {

/// Jacobian of some residual rows with respect to the rotated PaLS parameters.
struct ReducedJacobian {
  std::vector<int> rows;
  Eigen::MatrixXd mat;  // rows.size() x flat size of the rotated parameters
  std::vector<char> active;  // per basis: any nonzero column

  ReducedJacobian(std::vector<int> row_ids, const ParameterVector& params);

  /// mat.row(row).segment(basis) += weight * grad, marking the basis active.
  void add(Eigen::Index row, int basis, int stride, double weight, std::span<const double> grad);
};

/// Maps a reduced Jacobian to the extended parameters through rot_j:
/// basis blocks pick up d rot / d m_i, and the acquisition block of
/// experiment j collects d rot / d (theta, phi, b).
BlockJacobian chain_rotation(const ReducedJacobian& reduced, const ExtendedParameters& m, int experiment,
                             const Vec3& x_mid);

}  // namespace pals
