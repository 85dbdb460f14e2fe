#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pals/calib/rotation.hpp"
#include "pals/core/block_jacobian.hpp"
#include "pals/core/field.hpp"

namespace pals {

/// One dip: the recorded pose and the observed slice volumes along the third axis.
struct DipExperiment {
  AcquisitionParams acq;
  std::vector<double> observed;
};

/// Predicted data of one experiment and, optionally, its Jacobian with
/// respect to the extended parameters.
struct ForwardResult {
  Eigen::VectorXd data;
  std::optional<BlockJacobian> jacobian;
};

/// trace[k] = V * sum of u over slice k.
Eigen::VectorXd dip_trace(std::span<const double> u, const GridSpec& grid);

ForwardResult dip_forward(const ExtendedParameters& m, const GridSpec& grid, int experiment,
                          const FieldOptions& options = {}, bool want_jacobian = false);

/// Same, reusing an evaluation of the rotated parameters on `grid`.
ForwardResult dip_forward(const GridFieldEvaluator& rotated, const ExtendedParameters& m, int experiment,
                          bool want_jacobian);

}  // namespace pals
