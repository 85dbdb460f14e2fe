#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pals/io/simulate.hpp"
#include "pals/solver/joint.hpp"
#include "pals/solver/reconstruct.hpp"

namespace pals::cli {

struct GridConfig {
  std::array<int, 3> dims{32, 32, 32};
  Vec3 origin = Vec3::Zero();
  Vec3 extent = Vec3::Constant(GridSpec::kDefaultExtent);
  GridSpec spec() const { return GridSpec(dims, origin, extent); }
};

/// Input files of the reconstruction, one entry per modality.
struct ModalityInputs {
  std::optional<std::string> dip;   // dip CSV
  std::optional<std::string> sfs;   // silhouette manifest
  std::vector<std::string> pc;      // point-cloud files
};

/// Everything a run needs. Parsed from JSON with unknown keys rejected;
/// command-line flags are applied on top.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 0;
  BasisKind basis = BasisKind::ellipsoidal;
  WendlandOrder order = WendlandOrder::psi1;
  double delta = 0.1;
  double eps = 0.01;
  bool zero_background = true;
  double eps_norm = kDefaultEpsNorm;
  GridConfig grid{};
  GridConfig grid_hi{{64, 64, 64}};
  GNConfig gn{};
  RBFSchedule schedule{};
  NoiseSpec noise{};
  std::string phantom = "ellipsoid";
  SimulationOptions simulation{};
  ModalityInputs inputs{};
  GammaMode gamma = GammaMode::automatic();
  bool estimate_calibration = false;
  int calibration_start = ReconstructOptions{}.calibration_start;
  double calibration_prior = ReconstructOptions{}.calibration_prior;
  // Silhouette terms join the objective at this outer iteration. Their
  // first-hit model is discontinuous and pulls an early iterate into local
  // minima, so dips and point clouds shape the object first.
  int silhouette_start = 10;

  FieldOptions field_options() const;
  /// ConfigError on any inconsistent value.
  void validate() const;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace pals::cli
