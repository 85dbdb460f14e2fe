#include "pals/io/simulate.hpp"

#include <cmath>
#include <numbers>

#include "pals/core/errors.hpp"

namespace pals {

void NoiseSpec::validate() const {
  if (!(data_sigma_voxels >= 0.0) || !(angle_sigma_deg >= 0.0) || !(trans_frac >= 0.0)) {
    throw ConfigError("noise spec: all magnitudes must be >= 0");
  }
}

AcquisitionParams random_acquisition(std::mt19937_64& rng, double translation_box) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AcquisitionParams a;
  a.theta = 2.0 * std::numbers::pi * unit(rng);
  a.phi = std::acos(1.0 - 2.0 * unit(rng));
  for (int k = 0; k < 3; ++k) a.b[k] = translation_box * (2.0 * unit(rng) - 1.0);
  return a;
}

namespace {

int grid_factor(const GridSpec& hi, const GridSpec& lo) {
  if (!(hi.origin() == lo.origin()) || !(hi.extent() == lo.extent())) {
    throw ConfigError("simulate: hi- and lo-res grids must cover the same domain");
  }
  const int f = hi.dim(0) / lo.dim(0);
  for (int a = 0; a < 3; ++a) {
    if (f < 1 || lo.dim(a) * f != hi.dim(a)) throw ConfigError("simulate: hi-res dims must be a multiple of lo-res dims");
  }
  return f;
}

}  // namespace

SimulationResult simulate(const Phantom& phantom, const GridSpec& grid_hi, const GridSpec& grid_lo,
                          const SimulationOptions& options, const NoiseSpec& noise) {
  noise.validate();
  if (options.n_experiments < 1) throw ConfigError("simulate: n_experiments must be >= 1");
  const int factor = grid_factor(grid_hi, grid_lo);
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 mid = grid_lo.midpoint();

  SimulationResult out;
  for (int e = 0; e < options.n_experiments; ++e) {
    const AcquisitionParams truth = random_acquisition(rng, options.translation_box);
    AcquisitionParams rec = truth;
    const double angle_sigma = noise.angle_sigma_deg * std::numbers::pi / 180.0;
    const double trans_sigma = noise.trans_frac * grid_lo.extent().maxCoeff();
    rec.theta += angle_sigma * gauss(rng);
    rec.phi += angle_sigma * gauss(rng);
    for (int k = 0; k < 3; ++k) rec.b[k] += trans_sigma * gauss(rng);
    out.truth.push_back(truth);
    out.recorded.push_back(rec);

    const RigidTransform t(truth, mid);
    switch (options.modality) {
      case SimModality::dip: {
        const ScalarField hi = voxelize(phantom, grid_hi, [&](const Vec3& x) { return t.inverse(x); });
        const std::size_t slice = static_cast<std::size_t>(grid_hi.dim(0)) * grid_hi.dim(1);
        DipExperiment dip{rec, std::vector<double>(static_cast<std::size_t>(grid_lo.dim(2)), 0.0)};
        for (int k = 0; k < grid_hi.dim(2); ++k) {
          double s = 0.0;
          for (std::size_t n = 0; n < slice; ++n) s += hi.values()[static_cast<std::size_t>(k) * slice + n];
          dip.observed[static_cast<std::size_t>(k / factor)] += s * grid_hi.voxel_volume();
        }
        const double sigma = noise.data_sigma_voxels * grid_lo.voxel_volume();
        for (double& v : dip.observed) v = std::max(0.0, v + sigma * gauss(rng));
        out.dips.push_back(std::move(dip));
        break;
      }
      case SimModality::silhouette: {
        const ScalarField hi = voxelize(phantom, grid_hi, [&](const Vec3& x) { return t.inverse(x); });
        const ScalarField lo = downsample(hi, factor);
        out.silhouettes.push_back({rec, sfs_image(lo.values(), grid_lo, options.eta), options.eta});
        break;
      }
      case SimModality::point_cloud: {
        PointCloudData cloud;
        cloud.eps_offset = options.eps_offset > 0.0 ? options.eps_offset : 2.0 * grid_lo.spacing().maxCoeff();
        cloud.level = options.level;
        const Mat3& q = t.rotation();
        for (const SurfaceSample& s : phantom.sample_surface(static_cast<std::size_t>(options.n_points), rng)) {
          cloud.points.push_back(t.apply(s.point));
          cloud.normals.push_back((q * s.normal).normalized());
        }
        out.clouds.push_back(std::move(cloud));
        break;
      }
    }
  }
  return out;
}

}  // namespace pals
