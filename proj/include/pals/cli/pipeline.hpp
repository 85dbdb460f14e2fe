#pragma once

#include <functional>
#include <vector>

#include "pals/cli/run_config.hpp"
#include "pals/io/formats.hpp"

namespace pals::cli {

/// In-memory experiments of one reconstruction run.
struct ExperimentSet {
  std::vector<DipExperiment> dips;
  std::vector<SilhouetteExperiment> silhouettes;
  std::vector<PointCloudFile> clouds;
};

/// Reads the files named in cfg.inputs and checks their sizes against cfg.grid.
ExperimentSet load_experiments(const RunConfig& cfg);

/// Builds the weighted joint objective (dips, then silhouettes, then point
/// clouds; experiment indices in that order) and runs the outer loop.
ReconstructionResult run_reconstruction(const RunConfig& cfg, ExperimentSet experiments,
                                        std::function<void(const TraceRecord&)> on_step = {});

}  // namespace pals::cli
