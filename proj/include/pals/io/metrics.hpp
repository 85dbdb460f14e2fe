#pragma once

#include <vector>

#include "pals/core/field.hpp"

namespace pals {

struct Metrics {
  double iou = 0.0;
  double volume_rel_err = 0.0;
  std::vector<double> misfit_history;
};

/// Intersection over union of {a > 0.5} and {b > 0.5}; 1 when both are empty.
double iou(const ScalarField& a, const ScalarField& b);
/// |vol(a) - vol(b)| / vol(b) of the binarized fields (b is the reference).
double volume_rel_err(const ScalarField& a, const ScalarField& truth);
Metrics compare(const ScalarField& recon, const ScalarField& truth);

}  // namespace pals
