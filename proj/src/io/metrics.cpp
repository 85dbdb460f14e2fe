#include "pals/io/metrics.hpp"

#include <cmath>
#include <limits>

#include "pals/core/errors.hpp"

namespace pals {

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("metrics: fields live on different grids");
}

}  // namespace

double iou(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] > 0.5;
    const bool y = b[i] > 0.5;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double volume_rel_err(const ScalarField& a, const ScalarField& truth) {
  require_same_grid(a, truth);
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += a[i] > 0.5 ? 1.0 : 0.0;
    vb += truth[i] > 0.5 ? 1.0 : 0.0;
  }
  if (vb == 0.0) return va == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(va - vb) / vb;
}

Metrics compare(const ScalarField& recon, const ScalarField& truth) {
  return {iou(recon, truth), volume_rel_err(recon, truth), {}};
}

}  // namespace pals
