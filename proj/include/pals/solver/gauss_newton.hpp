#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "pals/solver/terms.hpp"

namespace pals {

struct GNConfig {
  int it_gn = 5;
  double lambda0 = 1e-3;
  double lambda_decay = 0.8;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int armijo_max = 20;
  double barrier_weight = 1e-6;

  /// ConfigError unless every field is positive and armijo_shrink < 1.
  void validate() const;
};

/// Regularization active during one GN step: lambda |m - anchor|^2 over the
/// free variables plus the log-det barrier for ellipsoidal bases. While the
/// acquisition blocks are free, calibration_prior * |acq - recorded|^2 keeps
/// them tied to the recorded values (0 disables it).
struct Regularization {
  Eigen::VectorXd anchor;
  double lambda = 1e-3;
  double barrier_weight = 1e-6;
  double calibration_prior = 0.0;
  Eigen::VectorXd recorded_acq;  // flat acquisition blocks, needed when calibration_prior > 0
};

struct ObjectiveValue {
  double misfit = 0.0;
  double reg = 0.0;
  double total() const { return misfit + reg; }
};

/// Free variables of the extended vector: every PaLS entry, plus the
/// acquisition blocks when calibration is estimated.
std::vector<int> free_column_map(const ExtendedParameters& m, bool estimate_calibration);

/// Evaluates every term (in parallel) in term order.
std::vector<TermEvaluation> evaluate_terms(const ExtendedParameters& m, std::span<const TermPtr> terms,
                                           bool want_jacobian);

/// Regularized objective; +inf when m lies outside the barrier or a basis is singular.
ObjectiveValue objective_value(const ExtendedParameters& m, std::span<const TermPtr> terms, const Regularization& reg,
                               bool estimate_calibration);

struct StepRecord {
  double objective_before = 0.0;
  double objective_after = 0.0;
  double misfit_after = 0.0;
  double reg_after = 0.0;
  double mu = 0.0;
  double lambda = 0.0;  // lambda used in the normal matrix
  int backtracks = 0;
  bool stalled = false;
};

struct StepResult {
  ExtendedParameters params;
  StepRecord record;
};

/// One damped Gauss-Newton step with Armijo backtracking.
StepResult gauss_newton_step(const ExtendedParameters& m, std::span<const TermPtr> terms, const Regularization& reg,
                             const GNConfig& cfg, bool estimate_calibration);

}  // namespace pals
