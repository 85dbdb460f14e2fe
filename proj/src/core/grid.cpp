#include "pals/core/grid.hpp"

#include <cmath>

#include "pals/core/errors.hpp"

namespace pals {

GridSpec::GridSpec(std::array<int, 3> dims, Vec3 origin, Vec3 extent)
    : dims_(dims), origin_(std::move(origin)), extent_(std::move(extent)) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[static_cast<std::size_t>(a)] < 2) throw ConfigError("grid: every dimension must be >= 2");
    if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a])) throw ConfigError("grid: extent must be positive");
    if (!std::isfinite(origin_[a])) throw ConfigError("grid: origin must be finite");
    spacing_[a] = extent_[a] / static_cast<double>(dims_[static_cast<std::size_t>(a)]);
  }
}

GridSpec GridSpec::cube(int n, double edge) { return GridSpec({n, n, n}, Vec3::Zero(), Vec3::Constant(edge)); }

std::size_t GridSpec::voxel_count() const {
  return static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(dims_[2]);
}

std::array<int, 3> GridSpec::unravel(std::size_t idx) const {
  const auto n1 = static_cast<std::size_t>(dims_[0]);
  const auto n2 = static_cast<std::size_t>(dims_[1]);
  return {static_cast<int>(idx % n1), static_cast<int>((idx / n1) % n2), static_cast<int>(idx / (n1 * n2))};
}

Vec3 GridSpec::center(std::size_t idx) const {
  const auto ijk = unravel(idx);
  return center(ijk[0], ijk[1], ijk[2]);
}

bool GridSpec::contains(const Vec3& p) const {
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] >= origin_[a]) || !(p[a] <= origin_[a] + extent_[a])) return false;
  }
  return true;
}

bool GridSpec::nearest_voxel(const Vec3& p, std::array<int, 3>& ijk) const {
  if (!contains(p)) return false;
  for (int a = 0; a < 3; ++a) {
    const int n = dims_[static_cast<std::size_t>(a)];
    int i = static_cast<int>(std::floor((p[a] - origin_[a]) / spacing_[a]));
    if (i >= n) i = n - 1;
    if (i < 0) i = 0;
    ijk[static_cast<std::size_t>(a)] = i;
  }
  return true;
}

bool GridSpec::operator==(const GridSpec& other) const {
  return dims_ == other.dims_ && origin_ == other.origin_ && extent_ == other.extent_;
}

}  // namespace pals
