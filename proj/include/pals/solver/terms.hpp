#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "pals/core/block_jacobian.hpp"
#include "pals/forward/dip.hpp"
#include "pals/forward/point_cloud.hpp"
#include "pals/forward/silhouette.hpp"

namespace pals {

enum class Modality { dip, silhouette, point_cloud };
std::string_view modality_name(Modality m);

struct TermEvaluation {
  Eigen::VectorXd residual;
  std::optional<BlockJacobian> jacobian;
};

/// One experiment of one modality. Its misfit is weight * 0.5 * |r|^2 and it
/// reads the acquisition block `experiment()` of the extended parameters.
class ObjectiveTerm {
 public:
  ObjectiveTerm(int experiment, const AcquisitionParams& recorded, double weight)
      : experiment_(experiment), recorded_(recorded), weight_(weight) {}
  virtual ~ObjectiveTerm() = default;

  virtual Modality modality() const = 0;
  virtual Eigen::Index residual_size() const = 0;
  /// Reconstruction grid, or nullptr for grid-free terms.
  virtual const GridSpec* grid() const = 0;
  virtual TermEvaluation evaluate(const ExtendedParameters& m, bool want_jacobian) const = 0;
  /// Adds d(misfit)/du at the voxels of `grid` (unrotated frame) to grad_u.
  virtual void deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual,
                                       const GridSpec& grid, std::span<double> grad_u) const = 0;

  int experiment() const { return experiment_; }
  const AcquisitionParams& recorded_acq() const { return recorded_; }
  double weight() const { return weight_; }
  void set_weight(double w) { weight_ = w; }
  double misfit(const Eigen::VectorXd& residual) const { return weight_ * 0.5 * residual.squaredNorm(); }

 private:
  int experiment_;
  AcquisitionParams recorded_;
  double weight_;
};

using TermPtr = std::shared_ptr<ObjectiveTerm>;

class DipTerm final : public ObjectiveTerm {
 public:
  DipTerm(GridSpec grid, DipExperiment data, int experiment, FieldOptions options = {}, double weight = 1.0);
  Modality modality() const override { return Modality::dip; }
  Eigen::Index residual_size() const override { return static_cast<Eigen::Index>(data_.observed.size()); }
  const GridSpec* grid() const override { return &grid_; }
  TermEvaluation evaluate(const ExtendedParameters& m, bool want_jacobian) const override;
  void deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual, const GridSpec& grid,
                               std::span<double> grad_u) const override;

 private:
  GridSpec grid_;
  DipExperiment data_;
  FieldOptions options_;
  Eigen::VectorXd observed_;
};

class SilhouetteTerm final : public ObjectiveTerm {
 public:
  SilhouetteTerm(GridSpec grid, SilhouetteExperiment data, int experiment, FieldOptions options = {},
                 double weight = 1.0);
  Modality modality() const override { return Modality::silhouette; }
  Eigen::Index residual_size() const override { return static_cast<Eigen::Index>(data_.observed.size()); }
  const GridSpec* grid() const override { return &grid_; }
  TermEvaluation evaluate(const ExtendedParameters& m, bool want_jacobian) const override;
  void deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual, const GridSpec& grid,
                               std::span<double> grad_u) const override;

 private:
  GridSpec grid_;
  SilhouetteExperiment data_;
  FieldOptions options_;
  Eigen::VectorXd observed_;
};

class PointCloudTerm final : public ObjectiveTerm {
 public:
  PointCloudTerm(PointCloudData cloud, AcquisitionParams recorded, int experiment, Vec3 x_mid,
                 FieldOptions options = {}, double weight = 1.0);
  Modality modality() const override { return Modality::point_cloud; }
  Eigen::Index residual_size() const override { return static_cast<Eigen::Index>(3 * cloud_.size()); }
  const GridSpec* grid() const override { return nullptr; }
  TermEvaluation evaluate(const ExtendedParameters& m, bool want_jacobian) const override;
  void deposit_misfit_gradient(const ExtendedParameters& m, const Eigen::VectorXd& residual, const GridSpec& grid,
                               std::span<double> grad_u) const override;

 private:
  PointCloudData cloud_;
  Vec3 x_mid_;
  FieldOptions options_;
  std::vector<Vec3> samples_;
  NeighborIndex index_;
};

}  // namespace pals
