#pragma once

#include <array>
#include <span>
#include <vector>

#include "pals/core/field.hpp"

namespace pals {

struct RBFSchedule {
  int p0 = 20;
  int p = 5;
  int outer_iters = 40;
  double init_radius = 1.0;
  double add_radius = 1.0 / 3.0;
  int min_spacing_cells = 2;
  double binarize_threshold = 0.7;

  void validate() const;
};

struct InsertionResult {
  ParameterVector params;
  std::vector<std::array<int, 3>> centers;  // voxels that received a new basis
};

/// Basis of the given kind with alpha, radius and center.
void append_basis(ParameterVector& params, double alpha, double radius, const Vec3& center);

/// Appends up to schedule.p zero-weight bases at the voxels with the largest
/// s = |sigma'(u) dF/du|, keeping selected centers (and `avoid`) at least
/// min_spacing_cells apart in Chebyshev distance. `slopes` is sigma' on `grid`.
InsertionResult add_rbfs(const ParameterVector& params, std::span<const double> slopes, std::span<const double> grad_u,
                         const RBFSchedule& schedule, const GridSpec& grid,
                         std::span<const std::array<int, 3>> avoid = {});

}  // namespace pals
