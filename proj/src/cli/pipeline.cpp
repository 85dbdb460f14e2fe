#include "pals/cli/pipeline.hpp"

#include <string>

#include "pals/core/errors.hpp"

namespace pals::cli {

ExperimentSet load_experiments(const RunConfig& c) {
  const GridSpec grid = c.grid.spec();
  ExperimentSet set;
  if (c.inputs.dip) set.dips = read_dip_csv(*c.inputs.dip);
  if (c.inputs.sfs) {
    int n1 = 0, n2 = 0;
    set.silhouettes = read_silhouettes(*c.inputs.sfs, &n1, &n2);
    if (n1 != grid.dims()[0] || n2 != grid.dims()[1]) {
      throw ConfigError("silhouette size does not match the reconstruction grid");
    }
  }
  for (const std::string& path : c.inputs.pc) set.clouds.push_back(read_point_cloud(path));
  return set;
}

ReconstructionResult run_reconstruction(const RunConfig& c, ExperimentSet set,
                                        std::function<void(const TraceRecord&)> on_step) {
  c.validate();
  const GridSpec grid = c.grid.spec();
  const FieldOptions fo = c.field_options();
  std::vector<std::vector<TermPtr>> by_modality;
  int experiment = 0;
  if (!set.dips.empty()) {
    std::vector<TermPtr> terms;
    for (DipExperiment& d : set.dips) {
      if (static_cast<int>(d.observed.size()) != grid.dims()[2]) {
        throw ConfigError("dip trace length " + std::to_string(d.observed.size()) + " does not match grid dims[2] = " +
                          std::to_string(grid.dims()[2]));
      }
      terms.push_back(std::make_shared<DipTerm>(grid, std::move(d), experiment++, fo));
    }
    by_modality.push_back(std::move(terms));
  }
  if (!set.silhouettes.empty()) {
    std::vector<TermPtr> terms;
    const auto n_pixels = static_cast<std::size_t>(grid.dims()[0]) * static_cast<std::size_t>(grid.dims()[1]);
    for (SilhouetteExperiment& s : set.silhouettes) {
      if (s.observed.size() != n_pixels) throw ConfigError("silhouette size does not match the reconstruction grid");
      terms.push_back(std::make_shared<SilhouetteTerm>(grid, std::move(s), experiment++, fo));
    }
    by_modality.push_back(std::move(terms));
  }
  if (!set.clouds.empty()) {
    std::vector<TermPtr> terms;
    for (PointCloudFile& file : set.clouds) {
      terms.push_back(
          std::make_shared<PointCloudTerm>(std::move(file.cloud), file.pose, experiment++, grid.midpoint(), fo));
    }
    by_modality.push_back(std::move(terms));
  }
  if (by_modality.empty()) throw ConfigError("reconstruct needs at least one input (--dip, --sfs or --pc)");

  ReconstructOptions ro;
  ro.kind = c.basis;
  ro.gn = c.gn;
  ro.schedule = c.schedule;
  ro.field = fo;
  ro.eps_norm = c.eps_norm;
  ro.estimate_calibration = c.estimate_calibration;
  ro.calibration_start = c.calibration_start;
  ro.calibration_prior = c.calibration_prior;
  ro.seed = c.seed;
  // Point clouds alone only pin down the surface.
  ro.fill_cavities = set.dips.empty() && set.silhouettes.empty();
  ro.on_step = std::move(on_step);

  // Automatic weights are measured at the starting point the solver will use.
  ExtendedParameters m0(initial_parameters(c.basis, grid, c.schedule, c.seed, c.eps_norm));
  for (const std::vector<TermPtr>& terms : by_modality) {
    for (const TermPtr& t : terms) m0.acq.push_back(t->recorded_acq());
  }
  const std::vector<TermPtr> terms = joint_objective(by_modality, c.gamma, &m0);
  for (const TermPtr& t : terms) ro.term_start.push_back(t->modality() == Modality::silhouette ? c.silhouette_start : 1);
  return reconstruct(terms, grid, ro);
}

}  // namespace pals::cli
