#include "pals/solver/gauss_newton.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <spdlog/spdlog.h>

#include "pals/core/errors.hpp"
#include "pals/core/parallel.hpp"
#include "pals/solver/regularizers.hpp"

namespace pals {

void GNConfig::validate() const {
  if (it_gn < 1) throw ConfigError("it_gn must be >= 1");
  if (!(lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
  if (!(lambda_decay > 0.0)) throw ConfigError("lambda_decay must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("armijo_c must lie in (0,1)");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) throw ConfigError("armijo_shrink must lie in (0,1)");
  if (armijo_max < 1) throw ConfigError("armijo_max must be >= 1");
  if (!(barrier_weight > 0.0)) throw ConfigError("barrier_weight must be positive");
}

std::vector<int> free_column_map(const ExtendedParameters& m, bool estimate_calibration) {
  std::vector<int> map(static_cast<std::size_t>(m.size()), -1);
  const Eigen::Index n = estimate_calibration ? m.size() : m.pals_size();
  for (Eigen::Index c = 0; c < n; ++c) map[static_cast<std::size_t>(c)] = static_cast<int>(c);
  return map;
}

std::vector<TermEvaluation> evaluate_terms(const ExtendedParameters& m, std::span<const TermPtr> terms,
                                           bool want_jacobian) {
  std::vector<TermEvaluation> out(terms.size());
  parallel_for(terms.size(), [&](std::size_t t) { out[t] = terms[t]->evaluate(m, want_jacobian); });
  return out;
}

namespace {

const Eigen::VectorXd& recorded_acq(const ExtendedParameters& m, const Regularization& reg) {
  if (reg.recorded_acq.size() != m.size() - m.pals_size()) {
    throw ContractError("calibration prior: recorded acquisition vector has the wrong length");
  }
  return reg.recorded_acq;
}

Eigen::Index free_size(const ExtendedParameters& m, bool estimate_calibration) {
  return estimate_calibration ? m.size() : m.pals_size();
}

double regularizer_value(const ExtendedParameters& m, const Regularization& reg, bool estimate_calibration) {
  const Eigen::Index n = free_size(m, estimate_calibration);
  if (reg.anchor.size() != m.size()) throw ContractError("regularization anchor has the wrong length");
  double v = iterated_tikhonov_value(m.flat().head(n), reg.anchor.head(n), reg.lambda);
  if (estimate_calibration && reg.calibration_prior > 0.0) {
    v += iterated_tikhonov_value(m.flat().tail(m.size() - m.pals_size()), recorded_acq(m, reg), reg.calibration_prior);
  }
  if (m.pals.kind() == BasisKind::ellipsoidal && m.pals.size() > 0) v += logdet_barrier_value(m.pals, reg.barrier_weight);
  return v;
}

}  // namespace

ObjectiveValue objective_value(const ExtendedParameters& m, std::span<const TermPtr> terms, const Regularization& reg,
                               bool estimate_calibration) {
  ObjectiveValue out;
  try {
    out.reg = regularizer_value(m, reg, estimate_calibration);
    const std::vector<TermEvaluation> evals = evaluate_terms(m, terms, false);
    for (std::size_t t = 0; t < terms.size(); ++t) out.misfit += terms[t]->misfit(evals[t].residual);
  } catch (const NumericalError&) {
    out.misfit = std::numeric_limits<double>::infinity();
  }
  return out;
}

StepResult gauss_newton_step(const ExtendedParameters& m, std::span<const TermPtr> terms, const Regularization& reg,
                             const GNConfig& cfg, bool estimate_calibration) {
  if (terms.empty()) throw ContractError("gauss-newton: no objective terms");
  const Eigen::Index n = free_size(m, estimate_calibration);
  const std::vector<int> col_map = free_column_map(m, estimate_calibration);
  const Eigen::VectorXd x = m.flat();

  // Normal equations of sum_t w_t/2 |r_t|^2.
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  double misfit = 0.0;
  {
    const std::vector<TermEvaluation> evals = evaluate_terms(m, terms, true);
    for (std::size_t t = 0; t < terms.size(); ++t) {
      misfit += terms[t]->misfit(evals[t].residual);
      evals[t].jacobian->accumulate_normal(terms[t]->weight(), evals[t].residual, col_map, normal, grad);
    }
  }
  const Penalty tik = iterated_tikhonov(x.head(n), reg.anchor.head(n), reg.lambda);
  double reg_value = tik.value;
  grad += tik.gradient;
  if (estimate_calibration && reg.calibration_prior > 0.0) {
    const Eigen::Index na = m.size() - m.pals_size();
    const Penalty prior = iterated_tikhonov(x.tail(na), recorded_acq(m, reg), reg.calibration_prior);
    reg_value += prior.value;
    grad.tail(na) += prior.gradient;
    normal.bottomRightCorner(na, na).diagonal().array() += 2.0 * reg.calibration_prior;
  }
  Eigen::MatrixXd barrier_hessian;
  if (m.pals.kind() == BasisKind::ellipsoidal && m.pals.size() > 0) {
    const Penalty bar = logdet_barrier(m.pals, reg.barrier_weight);
    reg_value += bar.value;
    grad.head(m.pals_size()) += bar.gradient;
    normal.topLeftCorner(m.pals_size(), m.pals_size()) += bar.hessian;
  }

  StepRecord rec;
  rec.objective_before = misfit + reg_value;
  rec.lambda = reg.lambda;

  double lambda = reg.lambda;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::MatrixXd h = normal;
    h.diagonal().array() += 2.0 * lambda;
    llt.compute(h);
    if (llt.info() == Eigen::Success) break;
    if (attempt == 1) {
      throw NumericalError("gauss-newton: normal matrix not positive definite (n=" + std::to_string(n) +
                           ", lambda=" + std::to_string(lambda) + ")");
    }
    spdlog::warn("gauss-newton: normal matrix factorization failed; raising lambda to {}", 10.0 * lambda);
    lambda *= 10.0;
  }
  rec.lambda = lambda;
  const Eigen::VectorXd dir = -llt.solve(grad);
  if (!dir.allFinite()) throw NumericalError("gauss-newton: non-finite search direction");
  const double slope = grad.dot(dir);

  double mu = 1.0;
  for (int bt = 0; bt < cfg.armijo_max; ++bt, mu *= cfg.armijo_shrink) {
    Eigen::VectorXd trial_x = x;
    trial_x.head(n) += mu * dir;
    ExtendedParameters trial = m;
    trial.assign(trial_x);
    const ObjectiveValue v = objective_value(trial, terms, reg, estimate_calibration);
    spdlog::debug("armijo mu {:.3e}: F {:.9e} vs F0 {:.9e} slope {:.3e}", mu, v.total(), rec.objective_before, slope);
    if (std::isfinite(v.total()) && v.total() <= rec.objective_before + cfg.armijo_c * mu * slope) {
      rec.objective_after = v.total();
      rec.misfit_after = v.misfit;
      rec.reg_after = v.reg;
      rec.mu = mu;
      rec.backtracks = bt;
      return {std::move(trial), rec};
    }
  }
  rec.stalled = true;
  rec.mu = 0.0;
  rec.backtracks = cfg.armijo_max;
  rec.objective_after = rec.objective_before;
  rec.misfit_after = misfit;
  rec.reg_after = reg_value;
  return {m, rec};
}

}  // namespace pals
