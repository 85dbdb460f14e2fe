#include "pals/solver/reconstruct.hpp"

#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "pals/core/errors.hpp"

namespace pals {

ParameterVector initial_parameters(BasisKind kind, const GridSpec& grid, const RBFSchedule& schedule,
                                   std::uint64_t seed, double eps_norm) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParameterVector params(kind, eps_norm);
  const Vec3 lo = grid.midpoint() - 0.1 * grid.extent();
  const Vec3 width = 0.2 * grid.extent();
  for (int i = 0; i < schedule.p0; ++i) {
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = lo[a] + width[a] * unit(rng);
    const double alpha = 0.05 + 0.1 * unit(rng);
    append_basis(params, alpha, schedule.init_radius, c);
  }
  return params;
}

namespace {

std::vector<AcquisitionParams> recorded_acquisitions(std::span<const TermPtr> terms) {
  int n_ex = 0;
  for (const TermPtr& t : terms) n_ex = std::max(n_ex, t->experiment() + 1);
  std::vector<AcquisitionParams> acq(static_cast<std::size_t>(n_ex));
  std::vector<char> seen(static_cast<std::size_t>(n_ex), 0);
  for (const TermPtr& t : terms) {
    const auto e = static_cast<std::size_t>(t->experiment());
    if (t->experiment() < 0) throw ConfigError("objective term with a negative experiment index");
    if (seen[e] && !(acq[e] == t->recorded_acq())) {
      throw ConfigError("experiment " + std::to_string(e) + " has conflicting recorded acquisition parameters");
    }
    acq[e] = t->recorded_acq();
    seen[e] = 1;
  }
  return acq;
}

}  // namespace

ReconstructionResult reconstruct(std::span<const TermPtr> terms, const GridSpec& grid,
                                 const ReconstructOptions& options) {
  if (terms.empty()) throw ConfigError("reconstruct: no objective terms");
  options.gn.validate();
  options.schedule.validate();
  options.field.heaviside.validate();
  for (const TermPtr& t : terms) {
    if (t->grid() != nullptr && !(*t->grid() == grid)) {
      throw ConfigError("reconstruct: every gridded term must use the reconstruction grid");
    }
  }

  if (!options.term_start.empty() && options.term_start.size() != terms.size()) {
    throw ConfigError("reconstruct: term_start needs one entry per term");
  }
  auto active_terms = [&](int outer) {
    std::vector<TermPtr> out;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (options.term_start.empty() || options.term_start[t] <= outer) out.push_back(terms[t]);
    }
    return out;
  };

  ExtendedParameters m(initial_parameters(options.kind, grid, options.schedule, options.seed, options.eps_norm),
                       recorded_acquisitions(terms));
  if (options.calibration_start < 1) throw ConfigError("calibration_start must be >= 1");
  bool calib = false;
  if (!(options.calibration_prior >= 0.0)) throw ConfigError("calibration_prior must be >= 0");
  Regularization reg{m.flat(), options.gn.lambda0, options.gn.barrier_weight, options.calibration_prior,
                     m.flat().tail(m.size() - m.pals_size())};

  OptimizationTrace trace;
  {
    const ObjectiveValue v0 = objective_value(m, active_terms(1), reg, calib);
    TraceRecord r0;
    r0.misfit = v0.misfit;
    r0.reg = v0.reg;
    r0.objective_before = r0.objective = v0.total();
    r0.n_rbf = m.pals.size();
    r0.lambda = reg.lambda;
    r0.acq = m.acq;
    trace.records.push_back(r0);
    spdlog::info("reconstruct: start misfit {:.6e} with {} bases", v0.misfit, m.pals.size());
  }

  std::vector<std::array<int, 3>> last_centers;
  int iter = 0;
  for (int outer = 1; outer <= options.schedule.outer_iters; ++outer) {
    const std::vector<TermPtr> active = active_terms(outer);
    // Insertion where the misfit pulls hardest on the level set.
    {
      const GridFieldEvaluator eval(m.pals, grid, options.field);
      const std::vector<TermEvaluation> evals = evaluate_terms(m, active, false);
      std::vector<double> grad_u(grid.voxel_count(), 0.0);
      for (std::size_t t = 0; t < active.size(); ++t) {
        active[t]->deposit_misfit_gradient(m, evals[t].residual, grid, grad_u);
      }
      InsertionResult ins = add_rbfs(m.pals, eval.slopes(), grad_u, options.schedule, grid, last_centers);
      m.pals = std::move(ins.params);
      last_centers = std::move(ins.centers);
    }
    reg.anchor = m.flat();
    calib = options.estimate_calibration && outer >= options.calibration_start;

    for (int k = 0; k < options.gn.it_gn; ++k) {
      StepResult step = gauss_newton_step(m, active, reg, options.gn, calib);
      if (step.record.stalled) {
        ++trace.stalled_steps;
        spdlog::debug("reconstruct: outer {} step {} stalled", outer, k);
        break;
      }
      m = std::move(step.params);
      TraceRecord rec;
      rec.iter = ++iter;
      rec.outer = outer;
      rec.misfit = step.record.misfit_after;
      rec.reg = step.record.reg_after;
      rec.objective_before = step.record.objective_before;
      rec.objective = step.record.objective_after;
      rec.n_rbf = m.pals.size();
      rec.step = step.record.mu;
      rec.lambda = step.record.lambda;
      rec.acq = m.acq;
      trace.records.push_back(rec);
      if (options.on_step) options.on_step(rec);
    }
    trace.rbf_counts.push_back(m.pals.size());
    spdlog::info("reconstruct: outer {:3d}  misfit {:.6e}  bases {}", outer, trace.final_misfit(), m.pals.size());
    reg.lambda *= options.gn.lambda_decay;
  }

  GridFieldEvaluator final_eval(m.pals, grid, options.field);
  ScalarField field = final_eval.field();
  ScalarField binary = binarize(field, options.schedule.binarize_threshold);
  if (options.fill_cavities) binary = fill_enclosed(binary);
  return {std::move(m), std::move(field), std::move(binary), std::move(trace)};
}

}  // namespace pals
