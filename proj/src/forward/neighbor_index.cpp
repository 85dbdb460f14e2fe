#include "pals/forward/neighbor_index.hpp"

#include <algorithm>
#include <cmath>

#include "pals/core/errors.hpp"

namespace pals {

namespace {
constexpr int kMaxCellsPerAxis = 128;
}

NeighborIndex::NeighborIndex(std::span<const Vec3> points, double cell_size) : points_(points.begin(), points.end()) {
  for (const Vec3& p : points_) {
    if (!p.allFinite()) throw DomainError("neighbor index: non-finite point");
  }
  if (points_.empty()) {
    cell_start_ = {0, 0};
    return;
  }
  Vec3 hi = points_.front();
  lo_ = points_.front();
  for (const Vec3& p : points_) {
    lo_ = lo_.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 span = (hi - lo_).cwiseMax(1e-12);
  if (cell_size <= 0.0) {
    // About four points per cell if they filled the bounding box.
    const double vol = span.prod();
    cell_size = std::cbrt(4.0 * vol / static_cast<double>(points_.size()));
    if (!(cell_size > 0.0)) cell_size = span.maxCoeff();
  }
  cell_ = std::max(cell_size, span.maxCoeff() / kMaxCellsPerAxis);
  for (int a = 0; a < 3; ++a) dims_[a] = std::max(1, static_cast<int>(std::floor(span[a] / cell_)) + 1);

  const std::size_t n_cells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<int> cell_of(points_.size());
  cell_start_.assign(n_cells + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec3& p = points_[i];
    const int c = cell_coord(p.x(), 0) + dims_[0] * (cell_coord(p.y(), 1) + dims_[1] * cell_coord(p.z(), 2));
    cell_of[i] = c;
    ++cell_start_[static_cast<std::size_t>(c) + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_points_.resize(points_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    cell_points_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++)] = static_cast<int>(i);
  }
}

int NeighborIndex::cell_coord(double v, int axis) const {
  const int c = static_cast<int>(std::floor((v - lo_[axis]) / cell_));
  return std::clamp(c, 0, dims_[axis] - 1);
}

std::vector<int> NeighborIndex::query_ball(const Vec3& center, double radius) const {
  std::vector<int> out;
  query_ball(center, radius, out);
  return out;
}

void NeighborIndex::query_ball(const Vec3& center, double radius, std::vector<int>& out) const {
  out.clear();
  if (points_.empty() || !(radius >= 0.0)) return;
  int lo[3];
  int hi[3];
  for (int a = 0; a < 3; ++a) {
    const double a_lo = (center[a] - radius - lo_[a]) / cell_;
    const double a_hi = (center[a] + radius - lo_[a]) / cell_;
    if (a_hi < 0.0 || a_lo >= dims_[a]) return;
    // clamp before the cast; a tiny cell can put the range far outside int
    lo[a] = static_cast<int>(std::floor(std::max(0.0, a_lo)));
    hi[a] = static_cast<int>(std::floor(std::min(static_cast<double>(dims_[a] - 1), a_hi)));
  }
  const double r2 = radius * radius;
  for (int k = lo[2]; k <= hi[2]; ++k) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const std::size_t c = static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k));
        for (int n = cell_start_[c]; n < cell_start_[c + 1]; ++n) {
          const int idx = cell_points_[static_cast<std::size_t>(n)];
          if ((points_[static_cast<std::size_t>(idx)] - center).squaredNorm() <= r2) out.push_back(idx);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace pals
