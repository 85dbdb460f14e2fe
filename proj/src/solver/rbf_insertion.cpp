#include "pals/solver/rbf_insertion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pals/core/errors.hpp"

namespace pals {

void RBFSchedule::validate() const {
  if (p0 < 1 || p < 1) throw ConfigError("rbf schedule: p0 and p must be >= 1");
  if (outer_iters < 0) throw ConfigError("rbf schedule: outer_iters must be >= 0");
  if (!(init_radius > 0.0) || !(add_radius > 0.0)) throw ConfigError("rbf schedule: radii must be positive");
  if (min_spacing_cells < 0) throw ConfigError("rbf schedule: min_spacing_cells must be >= 0");
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
    throw ConfigError("rbf schedule: binarize_threshold must lie in (0,1)");
  }
}

void append_basis(ParameterVector& params, double alpha, double radius, const Vec3& center) {
  const double beta = 1.0 / radius;
  switch (params.kind()) {
    case BasisKind::spherical:
      params.add(SphericalBasis(alpha, beta, center));
      break;
    case BasisKind::ellipsoidal:
      params.add(EllipsoidBasis(alpha, Mat3(Mat3::Identity() * (beta * beta)), center));
      break;
    case BasisKind::cholesky: {
      Vec6 l = Vec6::Zero();
      l[0] = l[3] = l[5] = beta;
      params.add(CholeskyBasis(alpha, l, center));
      break;
    }
  }
}

namespace {

int chebyshev(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

}  // namespace

InsertionResult add_rbfs(const ParameterVector& params, std::span<const double> slopes, std::span<const double> grad_u,
                         const RBFSchedule& schedule, const GridSpec& grid,
                         std::span<const std::array<int, 3>> avoid) {
  const std::size_t n_vox = grid.voxel_count();
  if (grad_u.size() != n_vox || slopes.size() != n_vox) {
    throw ContractError("add_rbfs: slope and gradient arrays must have one entry per voxel");
  }
  std::vector<double> s(n_vox);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n_vox; ++i) {
    s[i] = std::abs(slopes[i] * grad_u[i]);
    if (s[i] > 0.0 && std::isfinite(s[i])) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  InsertionResult out{params, {}};
  for (std::size_t idx : order) {
    if (static_cast<int>(out.centers.size()) >= schedule.p) break;
    const std::array<int, 3> ijk = grid.unravel(idx);
    bool ok = true;
    for (const auto& c : out.centers) ok = ok && chebyshev(ijk, c) >= schedule.min_spacing_cells;
    for (const auto& c : avoid) ok = ok && chebyshev(ijk, c) >= schedule.min_spacing_cells;
    if (!ok) continue;
    out.centers.push_back(ijk);
    append_basis(out.params, 0.0, schedule.add_radius, grid.center(idx));
  }
  if (static_cast<int>(out.centers.size()) < schedule.p) {
    spdlog::warn("add_rbfs: only {} of {} requested bases had eligible voxels", out.centers.size(), schedule.p);
  }
  return out;
}

}  // namespace pals
