#include "pals/solver/joint.hpp"

#include <cmath>

#include "pals/core/errors.hpp"
#include "pals/solver/gauss_newton.hpp"

namespace pals {

namespace {

double unweighted_misfit(const std::vector<TermPtr>& terms, const ExtendedParameters& m) {
  const std::vector<TermEvaluation> evals = evaluate_terms(m, terms, false);
  double f = 0.0;
  for (const TermEvaluation& e : evals) f += 0.5 * e.residual.squaredNorm();
  return f;
}

}  // namespace

std::vector<TermPtr> joint_objective(const std::vector<std::vector<TermPtr>>& by_modality, GammaMode mode,
                                     const ExtendedParameters* m0) {
  std::vector<const std::vector<TermPtr>*> groups;
  for (const auto& g : by_modality) {
    if (!g.empty()) groups.push_back(&g);
  }
  if (groups.empty()) throw ConfigError("joint objective: no modality has any terms");
  if (mode.kind == GammaMode::Kind::fixed && !(mode.gamma > 0.0)) throw ConfigError("joint objective: gamma must be positive");
  if (mode.kind == GammaMode::Kind::automatic && m0 == nullptr && groups.size() > 1) {
    throw ContractError("joint objective: automatic gamma needs the initial parameters");
  }

  std::vector<double> weights(groups.size(), 1.0);
  if (groups.size() > 1) {
    if (mode.kind == GammaMode::Kind::fixed) {
      for (std::size_t l = 1; l < groups.size(); ++l) weights[l] = mode.gamma;
    } else {
      const double f0 = unweighted_misfit(*groups[0], *m0);
      for (std::size_t l = 1; l < groups.size(); ++l) {
        const double fl = unweighted_misfit(*groups[l], *m0);
        if (!(fl > 0.0) || !(f0 > 0.0) || !std::isfinite(f0 / fl)) {
          throw NumericalError("joint objective: automatic gamma undefined for a zero initial misfit");
        }
        weights[l] = f0 / fl;
      }
    }
  }
  std::vector<TermPtr> out;
  for (std::size_t l = 0; l < groups.size(); ++l) {
    for (const TermPtr& t : *groups[l]) {
      t->set_weight(weights[l]);
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace pals
