#include "pals/forward/dip.hpp"

#include <numeric>

#include "pals/forward/chain.hpp"

namespace pals {

Eigen::VectorXd dip_trace(std::span<const double> u, const GridSpec& grid) {
  const int n3 = grid.dim(2);
  const std::size_t slice = static_cast<std::size_t>(grid.dim(0)) * static_cast<std::size_t>(grid.dim(1));
  const double v = grid.voxel_volume();
  Eigen::VectorXd trace(n3);
  for (int k = 0; k < n3; ++k) {
    double s = 0.0;
    const double* p = u.data() + static_cast<std::size_t>(k) * slice;
    for (std::size_t n = 0; n < slice; ++n) s += p[n];
    trace[k] = v * s;
  }
  return trace;
}

ForwardResult dip_forward(const GridFieldEvaluator& rotated, const ExtendedParameters& m, int experiment,
                          bool want_jacobian) {
  const GridSpec& grid = rotated.grid();
  ForwardResult out{dip_trace(rotated.values(), grid), std::nullopt};
  if (!want_jacobian) return out;
  const int n3 = grid.dim(2);
  std::vector<int> rows(static_cast<std::size_t>(n3));
  std::iota(rows.begin(), rows.end(), 0);
  ReducedJacobian reduced(std::move(rows), rotated.params());
  const double v = grid.voxel_volume();
  const int stride = rotated.params().stride();
  const std::size_t slice = static_cast<std::size_t>(grid.dim(0)) * static_cast<std::size_t>(grid.dim(1));
  rotated.visit_gradients([&](std::size_t voxel, int basis, std::span<const double> g) {
    reduced.add(static_cast<Eigen::Index>(voxel / slice), basis, stride, v, g);
  });
  out.jacobian = chain_rotation(reduced, m, experiment, grid.midpoint());
  return out;
}

ForwardResult dip_forward(const ExtendedParameters& m, const GridSpec& grid, int experiment,
                          const FieldOptions& options, bool want_jacobian) {
  const ParameterVector rotated = rotate_params(m.pals, m.acq.at(static_cast<std::size_t>(experiment)), grid.midpoint());
  const GridFieldEvaluator eval(rotated, grid, options);
  return dip_forward(eval, m, experiment, want_jacobian);
}

}  // namespace pals
