#pragma once

#include <vector>

#include "pals/solver/terms.hpp"

namespace pals {

struct GammaMode {
  enum class Kind { fixed, automatic };
  Kind kind = Kind::fixed;
  double gamma = 1.0;

  static GammaMode fixed(double g) { return {Kind::fixed, g}; }
  static GammaMode automatic() { return {Kind::automatic, 1.0}; }
};

/// Weights the terms of each modality and returns them as one list. The first
/// modality keeps weight 1. In fixed mode every other modality gets gamma;
/// in automatic mode modality l gets F_0(m0) / F_l(m0) so that all weighted
/// initial misfits are equal. Terms are shared, so their weights change in place.
std::vector<TermPtr> joint_objective(const std::vector<std::vector<TermPtr>>& by_modality, GammaMode mode,
                                     const ExtendedParameters* m0 = nullptr);

}  // namespace pals
