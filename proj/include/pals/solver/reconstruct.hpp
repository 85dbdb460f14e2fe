#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pals/core/field.hpp"
#include "pals/solver/gauss_newton.hpp"
#include "pals/solver/rbf_insertion.hpp"

namespace pals {

/// One accepted GN step (or, with iter 0, the starting point).
struct TraceRecord {
  int iter = 0;
  int outer = 0;
  double misfit = 0.0;
  double reg = 0.0;
  double objective_before = 0.0;
  double objective = 0.0;
  int n_rbf = 0;
  double step = 0.0;
  double lambda = 0.0;
  std::vector<AcquisitionParams> acq;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  std::vector<int> rbf_counts;  // after each outer iteration
  int stalled_steps = 0;

  double initial_misfit() const { return records.empty() ? 0.0 : records.front().misfit; }
  double final_misfit() const { return records.empty() ? 0.0 : records.back().misfit; }
};

struct ReconstructOptions {
  BasisKind kind = BasisKind::ellipsoidal;
  GNConfig gn{};
  RBFSchedule schedule{};
  FieldOptions field{HeavisideConfig::zero_background(), WendlandOrder::psi1};
  double eps_norm = kDefaultEpsNorm;
  bool estimate_calibration = false;
  /// First outer iteration (1-based) whose GN steps also move the acquisition parameters.
  int calibration_start = 4;
  /// Weight of calibration_prior * |acq - recorded|^2; 0 leaves the acquisition
  /// parameters to the data and the iterated Tikhonov term alone.
  double calibration_prior = 0.01;
  std::uint64_t seed = 0;
  /// Per-term first outer iteration (1-based) in which the term joins the
  /// objective; empty means every term is active from the start.
  std::vector<int> term_start;
  /// Fill enclosed background in the binarized result (see fill_enclosed).
  bool fill_cavities = false;
  /// Called after every accepted step.
  std::function<void(const TraceRecord&)> on_step;
};

struct ReconstructionResult {
  ExtendedParameters params;
  ScalarField field;
  ScalarField binary;
  OptimizationTrace trace;
};

/// p0 random bases around the grid center: centers uniform in the central 20%
/// box, radius schedule.init_radius, alpha uniform in [0.05, 0.15].
ParameterVector initial_parameters(BasisKind kind, const GridSpec& grid, const RBFSchedule& schedule,
                                   std::uint64_t seed, double eps_norm = kDefaultEpsNorm);

/// Outer loop: insert bases, re-anchor, it_gn GN steps, decay lambda; then
/// binarize on `grid`. Acquisition parameters start at each term's recorded values.
ReconstructionResult reconstruct(std::span<const TermPtr> terms, const GridSpec& grid,
                                 const ReconstructOptions& options);

}  // namespace pals
