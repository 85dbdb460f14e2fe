#include "pals/forward/silhouette.hpp"

#include <algorithm>
#include <cmath>

#include "pals/core/errors.hpp"
#include "pals/forward/chain.hpp"

namespace pals {

std::vector<int> sfs_boundary_run(std::span<const double> ray, double floor) {
  std::vector<int> run;
  const int n = static_cast<int>(ray.size());
  int k = 0;
  while (k < n && !(ray[static_cast<std::size_t>(k)] > floor)) ++k;
  if (k == n) return run;
  run.push_back(k);
  while (k + 1 < n && ray[static_cast<std::size_t>(k + 1)] > ray[static_cast<std::size_t>(k)]) {
    ++k;
    run.push_back(k);
  }
  return run;
}

SoftmaxVote softmax_vote(std::span<const double> ray, std::span<const int> run, double eta) {
  if (!(eta > 0.0)) throw ConfigError("softmax sharpness eta must be positive");
  SoftmaxVote out;
  if (run.empty()) return out;
  double top = ray[static_cast<std::size_t>(run[0])];
  for (int k : run) top = std::max(top, ray[static_cast<std::size_t>(k)]);
  std::vector<double> w(run.size());
  double total = 0.0;
  for (std::size_t n = 0; n < run.size(); ++n) {
    w[n] = std::exp(eta * (ray[static_cast<std::size_t>(run[n])] - top));
    total += w[n];
  }
  double d = 0.0;
  for (std::size_t n = 0; n < run.size(); ++n) {
    w[n] /= total;
    d += w[n] * ray[static_cast<std::size_t>(run[n])];
  }
  out.value = d;
  out.d_value.resize(run.size());
  for (std::size_t n = 0; n < run.size(); ++n) {
    out.d_value[n] = w[n] * (1.0 + eta * (ray[static_cast<std::size_t>(run[n])] - d));
  }
  return out;
}

namespace {

struct RayVotes {
  std::vector<double> image;
  std::vector<std::vector<int>> runs;
  std::vector<SoftmaxVote> votes;
};

RayVotes cast_rays(std::span<const double> u, const GridSpec& grid, double eta) {
  const int n1 = grid.dim(0);
  const int n2 = grid.dim(1);
  const int n3 = grid.dim(2);
  const std::size_t n_pix = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
  RayVotes out;
  out.image.assign(n_pix, 0.0);
  out.runs.resize(n_pix);
  out.votes.resize(n_pix);
  std::vector<double> ray(static_cast<std::size_t>(n3));
  for (std::size_t pix = 0; pix < n_pix; ++pix) {
    for (int k = 0; k < n3; ++k) ray[static_cast<std::size_t>(k)] = u[pix + n_pix * static_cast<std::size_t>(k)];
    out.runs[pix] = sfs_boundary_run(ray);
    out.votes[pix] = softmax_vote(ray, out.runs[pix], eta);
    out.image[pix] = std::clamp(out.votes[pix].value, 0.0, 1.0);
  }
  return out;
}

}  // namespace

std::vector<double> sfs_image(std::span<const double> u, const GridSpec& grid, double eta) {
  return cast_rays(u, grid, eta).image;
}

ForwardResult sfs_forward(const GridFieldEvaluator& rotated, const ExtendedParameters& m, int experiment, double eta,
                          bool want_jacobian) {
  const GridSpec& grid = rotated.grid();
  RayVotes rays = cast_rays(rotated.values(), grid, eta);
  ForwardResult out{Eigen::Map<const Eigen::VectorXd>(rays.image.data(), static_cast<Eigen::Index>(rays.image.size())),
                    std::nullopt};
  if (!want_jacobian) return out;

  // Per voxel: the compact row of its pixel and d image / d u, zero off the runs.
  const std::size_t n_pix = rays.image.size();
  const std::vector<double>& slopes = rotated.slopes();
  std::vector<int> row_of_pixel(n_pix, -1);
  std::vector<double> coef(grid.voxel_count(), 0.0);
  std::vector<int> rows;
  for (std::size_t pix = 0; pix < n_pix; ++pix) {
    bool live = false;
    for (std::size_t n = 0; n < rays.runs[pix].size(); ++n) {
      const std::size_t voxel = pix + n_pix * static_cast<std::size_t>(rays.runs[pix][n]);
      const double c = rays.votes[pix].d_value[n];
      if (c != 0.0 && slopes[voxel] != 0.0) {
        coef[voxel] = c;
        live = true;
      }
    }
    if (live) {
      row_of_pixel[pix] = static_cast<int>(rows.size());
      rows.push_back(static_cast<int>(pix));
    }
  }
  ReducedJacobian reduced(std::move(rows), rotated.params());
  const int stride = rotated.params().stride();
  rotated.visit_gradients([&](std::size_t voxel, int basis, std::span<const double> g) {
    const double c = coef[voxel];
    if (c == 0.0) return;
    reduced.add(row_of_pixel[voxel % n_pix], basis, stride, c, g);
  });
  out.jacobian = chain_rotation(reduced, m, experiment, grid.midpoint());
  return out;
}

ForwardResult sfs_forward(const ExtendedParameters& m, const GridSpec& grid, int experiment, double eta,
                          const FieldOptions& options, bool want_jacobian) {
  const ParameterVector rotated = rotate_params(m.pals, m.acq.at(static_cast<std::size_t>(experiment)), grid.midpoint());
  const GridFieldEvaluator eval(rotated, grid, options);
  return sfs_forward(eval, m, experiment, eta, want_jacobian);
}

}  // namespace pals
