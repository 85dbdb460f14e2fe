#pragma once

#include <vector>

#include "pals/forward/dip.hpp"
#include "pals/forward/neighbor_index.hpp"

namespace pals {

/// Oriented surface samples. Residuals ask for u = level on the surface,
/// 0 at eps_offset outside along the normal and 1 at eps_offset inside.
struct PointCloudData {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  double eps_offset = 0.3125;
  double level = 0.7;

  /// Throws ConfigError on empty clouds, size mismatch, non-unit normals or eps_offset <= 0.
  void validate() const;
  std::size_t size() const { return points.size(); }
  /// [x_i; x_i + eps n_i; x_i - eps n_i], 3N points.
  std::vector<Vec3> samples() const;
  /// Targets matching samples(): level, 0, 1.
  Eigen::VectorXd targets() const;
};

/// Residuals u(samples) - targets with the Jacobian against the extended
/// parameters; the field is rotated by acquisition block `experiment`.
/// `index` must be built over cloud.samples() when given.
ForwardResult pc_residuals(const ExtendedParameters& m, const PointCloudData& cloud, int experiment,
                           const FieldOptions& options = {}, bool want_jacobian = false,
                           const NeighborIndex* index = nullptr, const Vec3& x_mid = Vec3::Constant(2.5));

}  // namespace pals
