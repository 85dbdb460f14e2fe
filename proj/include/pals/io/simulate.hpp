#pragma once

#include <cstdint>
#include <vector>

#include "pals/forward/dip.hpp"
#include "pals/forward/point_cloud.hpp"
#include "pals/forward/silhouette.hpp"
#include "pals/io/phantom.hpp"

namespace pals {

struct NoiseSpec {
  double data_sigma_voxels = 2.0;  // trace noise std in units of the reconstruction voxel volume
  double angle_sigma_deg = 0.0;
  double trans_frac = 0.0;  // translation noise std as a fraction of the domain edge
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SimModality { dip, silhouette, point_cloud };

struct SimulationOptions {
  SimModality modality = SimModality::dip;
  int n_experiments = 30;
  double translation_box = 0.05;  // true b is uniform in [-box, box]^3
  double eta = 50.0;
  int n_points = 500;
  double eps_offset = 0.0;  // <= 0: two voxel widths of grid_lo
  double level = 0.7;
};

struct SimulationResult {
  std::vector<AcquisitionParams> truth;
  std::vector<AcquisitionParams> recorded;
  std::vector<DipExperiment> dips;
  std::vector<SilhouetteExperiment> silhouettes;
  std::vector<PointCloudData> clouds;
};

/// Random pose: theta uniform in [0, 2pi), cos(phi) uniform in [-1, 1], b in the box.
AcquisitionParams random_acquisition(std::mt19937_64& rng, double translation_box);

/// Clean data come from the true poses on grid_hi (binned to grid_lo); the
/// recorded poses carry the calibration noise. Bit-identical for equal inputs.
SimulationResult simulate(const Phantom& phantom, const GridSpec& grid_hi, const GridSpec& grid_lo,
                          const SimulationOptions& options, const NoiseSpec& noise);

}  // namespace pals
