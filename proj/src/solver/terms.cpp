#include "pals/solver/terms.hpp"

#include <string>

#include "pals/core/errors.hpp"

namespace pals {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::dip:
      return "dip";
    case Modality::silhouette:
      return "sfs";
    case Modality::point_cloud:
      return "pc";
  }
  return "unknown";
}

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Adds `value` at the voxel nearest to T^{-1}(x), if inside the grid.
void deposit_at(const GridSpec& grid, const RigidTransform& t, const Vec3& x, double value, std::span<double> grad_u) {
  std::array<int, 3> ijk{};
  if (grid.nearest_voxel(t.inverse(x), ijk)) grad_u[grid.index(ijk[0], ijk[1], ijk[2])] += value;
}

}  // namespace

DipTerm::DipTerm(GridSpec grid, DipExperiment data, int experiment, FieldOptions options, double weight)
    : ObjectiveTerm(experiment, data.acq, weight),
      grid_(std::move(grid)),
      data_(std::move(data)),
      options_(options),
      observed_(to_vector(data_.observed)) {
  if (data_.observed.size() != static_cast<std::size_t>(grid_.dim(2))) {
    throw ConfigError("dip experiment: trace length " + std::to_string(data_.observed.size()) +
                      " does not match grid depth " + std::to_string(grid_.dim(2)));
  }
}

TermEvaluation DipTerm::evaluate(const ExtendedParameters& m, bool want_jacobian) const {
  ForwardResult f = dip_forward(m, grid_, experiment(), options_, want_jacobian);
  return {f.data - observed_, std::move(f.jacobian)};
}

void DipTerm::deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual,
                                      const GridSpec& grid, std::span<double> grad_u) const {
  // Base voxel y feeds slice k of the rotated grid when T(y) falls in it.
  const RigidTransform t(m.acq.at(static_cast<std::size_t>(experiment())), grid_.midpoint());
  const double scale = weight() * grid_.voxel_volume();
  for (std::size_t idx = 0; idx < grid.voxel_count(); ++idx) {
    std::array<int, 3> ijk{};
    if (grid_.nearest_voxel(t.apply(grid.center(idx)), ijk)) grad_u[idx] += scale * residual[ijk[2]];
  }
}

SilhouetteTerm::SilhouetteTerm(GridSpec grid, SilhouetteExperiment data, int experiment, FieldOptions options,
                               double weight)
    : ObjectiveTerm(experiment, data.acq, weight),
      grid_(std::move(grid)),
      data_(std::move(data)),
      options_(options),
      observed_(to_vector(data_.observed)) {
  const std::size_t n_pix = static_cast<std::size_t>(grid_.dim(0)) * static_cast<std::size_t>(grid_.dim(1));
  if (data_.observed.size() != n_pix) throw ConfigError("silhouette: image size does not match the grid cross-section");
  if (!(data_.eta > 0.0)) throw ConfigError("silhouette: eta must be positive");
}

TermEvaluation SilhouetteTerm::evaluate(const ExtendedParameters& m, bool want_jacobian) const {
  ForwardResult f = sfs_forward(m, grid_, experiment(), data_.eta, options_, want_jacobian);
  return {f.data - observed_, std::move(f.jacobian)};
}

void SilhouetteTerm::deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual,
                                             const GridSpec& grid, std::span<double> grad_u) const {
  const AcquisitionParams& acq = m.acq.at(static_cast<std::size_t>(experiment()));
  const ParameterVector rotated = rotate_params(m.pals, acq, grid_.midpoint());
  const GridFieldEvaluator eval(rotated, grid_, options_);
  const RigidTransform t(acq, grid_.midpoint());
  const std::size_t n_pix = static_cast<std::size_t>(grid_.dim(0)) * static_cast<std::size_t>(grid_.dim(1));
  const int n3 = grid_.dim(2);
  std::vector<double> ray(static_cast<std::size_t>(n3));
  for (std::size_t pix = 0; pix < n_pix; ++pix) {
    if (residual[static_cast<Eigen::Index>(pix)] == 0.0) continue;
    for (int k = 0; k < n3; ++k) ray[static_cast<std::size_t>(k)] = eval.values()[pix + n_pix * static_cast<std::size_t>(k)];
    const std::vector<int> run = sfs_boundary_run(ray);
    const SoftmaxVote vote = softmax_vote(ray, run, data_.eta);
    for (std::size_t n = 0; n < run.size(); ++n) {
      const std::size_t voxel = pix + n_pix * static_cast<std::size_t>(run[n]);
      deposit_at(grid, t, grid_.center(voxel), weight() * residual[static_cast<Eigen::Index>(pix)] * vote.d_value[n],
                 grad_u);
    }
  }
}

PointCloudTerm::PointCloudTerm(PointCloudData cloud, AcquisitionParams recorded, int experiment, Vec3 x_mid,
                               FieldOptions options, double weight)
    : ObjectiveTerm(experiment, recorded, weight),
      cloud_((cloud.validate(), std::move(cloud))),
      x_mid_(std::move(x_mid)),
      options_(options),
      samples_(cloud_.samples()),
      index_(samples_) {}

TermEvaluation PointCloudTerm::evaluate(const ExtendedParameters& m, bool want_jacobian) const {
  ForwardResult f = pc_residuals(m, cloud_, experiment(), options_, want_jacobian, &index_, x_mid_);
  return {std::move(f.data), std::move(f.jacobian)};
}

void PointCloudTerm::deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual,
                                             const GridSpec& grid, std::span<double> grad_u) const {
  const RigidTransform t(m.acq.at(static_cast<std::size_t>(experiment())), x_mid_);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    deposit_at(grid, t, samples_[i], weight() * residual[static_cast<Eigen::Index>(i)], grad_u);
  }
}

}  // namespace pals
