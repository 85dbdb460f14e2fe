#pragma once

#include <span>
#include <vector>

#include "pals/core/types.hpp"

namespace pals {

/// Uniform-cell spatial hash over a fixed point set. Used to find the sample
/// points covered by a compactly supported basis without a volumetric grid.
class NeighborIndex {
 public:
  /// cell_size <= 0 picks a size giving a few points per occupied cell.
  explicit NeighborIndex(std::span<const Vec3> points, double cell_size = 0.0);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Indices of all points p with |p - center| <= radius, ascending.
  std::vector<int> query_ball(const Vec3& center, double radius) const;
  void query_ball(const Vec3& center, double radius, std::vector<int>& out) const;

 private:
  std::vector<Vec3> points_;
  Vec3 lo_ = Vec3::Zero();
  double cell_ = 1.0;
  int dims_[3] = {1, 1, 1};
  std::vector<int> cell_start_;  // CSR offsets, one per cell plus a sentinel
  std::vector<int> cell_points_;

  int cell_coord(double v, int axis) const;
};

}  // namespace pals
