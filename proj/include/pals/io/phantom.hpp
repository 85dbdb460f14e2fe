#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pals/core/field.hpp"

namespace pals {

/// Solid ellipsoid {x : |diag(1/axes) R^T (x - center)| <= 1}.
struct EllipsoidPrimitive {
  Vec3 center;
  Vec3 axes;
  Mat3 rotation = Mat3::Identity();
};

/// Axis-aligned solid box.
struct BoxPrimitive {
  Vec3 center;
  Vec3 half;
};

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
};

/// Union of analytic primitives.
class Phantom {
 public:
  Phantom(std::string name, std::vector<EllipsoidPrimitive> ellipsoids, std::vector<BoxPrimitive> boxes = {});

  /// "sphere", "ellipsoid", "nonconvex" or "cube" on the given domain.
  static Phantom named(const std::string& name, const GridSpec& domain);

  const std::string& name() const { return name_; }
  const std::vector<EllipsoidPrimitive>& ellipsoids() const { return ellipsoids_; }
  const std::vector<BoxPrimitive>& boxes() const { return boxes_; }

  bool contains(const Vec3& p) const;
  /// Signed distance for spheres and boxes; for ellipsoids a first-order
  /// estimate (implicit value over gradient norm). Negative inside.
  double signed_distance(const Vec3& p) const;
  /// Volume when primitives do not overlap (exact for single primitives).
  double volume() const;
  /// Points on the union's boundary with outward unit normals.
  std::vector<SurfaceSample> sample_surface(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::string name_;
  std::vector<EllipsoidPrimitive> ellipsoids_;
  std::vector<BoxPrimitive> boxes_;
};

/// 1 at voxel centers inside the phantom. `to_phantom` maps grid points into
/// phantom coordinates (identity by default).
ScalarField voxelize(const Phantom& phantom, const GridSpec& grid);
ScalarField voxelize(const Phantom& phantom, const GridSpec& grid, const std::function<Vec3(const Vec3&)>& to_phantom);

/// Averages factor^3 blocks. ConfigError when factor does not divide every dim.
ScalarField downsample(const ScalarField& field, int factor);

}  // namespace pals
