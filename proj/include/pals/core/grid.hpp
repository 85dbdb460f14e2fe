#pragma once

#include <array>
#include <cstddef>

#include "pals/core/types.hpp"

namespace pals {

/// Regular voxel grid over an axis-aligned box. Samples sit at cell centers,
/// origin + (i + 0.5) * spacing, and voxels are stored x-fastest.
class GridSpec {
 public:
  static constexpr double kDefaultExtent = 5.0;

  GridSpec(std::array<int, 3> dims, Vec3 origin = Vec3::Zero(),
           Vec3 extent = Vec3::Constant(kDefaultExtent));

  /// Cubic grid of n^3 voxels over [0,5]^3.
  static GridSpec cube(int n, double edge = kDefaultExtent);

  const std::array<int, 3>& dims() const { return dims_; }
  int dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  const Vec3& origin() const { return origin_; }
  const Vec3& extent() const { return extent_; }
  const Vec3& spacing() const { return spacing_; }
  double voxel_volume() const { return spacing_.prod(); }
  std::size_t voxel_count() const;
  Vec3 midpoint() const { return origin_ + 0.5 * extent_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(k));
  }
  std::array<int, 3> unravel(std::size_t idx) const;

  /// Coordinate of the voxel center along one axis. The SIMD row kernels use
  /// the same expression, which keeps grid and point evaluation bit-identical.
  double center_coord(int axis, int i) const {
    return origin_[axis] + (static_cast<double>(i) + 0.5) * spacing_[axis];
  }
  Vec3 center(int i, int j, int k) const {
    return {center_coord(0, i), center_coord(1, j), center_coord(2, k)};
  }
  Vec3 center(std::size_t idx) const;

  bool contains(const Vec3& p) const;
  /// Nearest voxel to p; false when p lies outside the domain box.
  bool nearest_voxel(const Vec3& p, std::array<int, 3>& ijk) const;

  bool operator==(const GridSpec& other) const;

 private:
  std::array<int, 3> dims_;
  Vec3 origin_;
  Vec3 extent_;
  Vec3 spacing_;
};

}  // namespace pals
