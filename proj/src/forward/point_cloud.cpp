#include "pals/forward/point_cloud.hpp"

#include <cmath>
#include <memory>

#include "pals/core/errors.hpp"
#include "pals/forward/chain.hpp"

namespace pals {

void PointCloudData::validate() const {
  if (points.empty()) throw ConfigError("point cloud: no points");
  if (normals.size() != points.size()) throw ConfigError("point cloud: normals and points differ in count");
  if (!(eps_offset > 0.0)) throw ConfigError("point cloud: eps_offset must be positive");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) throw ConfigError("point cloud: non-finite point");
    if (std::abs(normals[i].norm() - 1.0) > 1e-6) throw ConfigError("point cloud: normals must have unit length");
  }
}

std::vector<Vec3> PointCloudData::samples() const {
  const std::size_t n = points.size();
  std::vector<Vec3> s(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = points[i];
    s[n + i] = points[i] + eps_offset * normals[i];
    s[2 * n + i] = points[i] - eps_offset * normals[i];
  }
  return s;
}

Eigen::VectorXd PointCloudData::targets() const {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd t(3 * n);
  t.head(n).setConstant(level);
  t.segment(n, n).setZero();
  t.tail(n).setOnes();
  return t;
}

ForwardResult pc_residuals(const ExtendedParameters& m, const PointCloudData& cloud, int experiment,
                           const FieldOptions& options, bool want_jacobian, const NeighborIndex* index,
                           const Vec3& x_mid) {
  cloud.validate();
  std::unique_ptr<NeighborIndex> own;
  if (index == nullptr) {
    const std::vector<Vec3> s = cloud.samples();
    own = std::make_unique<NeighborIndex>(s);
    index = own.get();
  }
  if (index->size() != 3 * cloud.size()) throw ContractError("point cloud: neighbor index does not match samples");
  const ParameterVector rotated = rotate_params(m.pals, m.acq.at(static_cast<std::size_t>(experiment)), x_mid);
  const PointFieldEvaluator eval(rotated, *index, options);
  const Eigen::VectorXd u =
      Eigen::Map<const Eigen::VectorXd>(eval.values().data(), static_cast<Eigen::Index>(eval.values().size()));
  ForwardResult out{u - cloud.targets(), std::nullopt};
  if (!want_jacobian) return out;

  const std::vector<double>& slopes = eval.slopes();
  std::vector<int> row_of(slopes.size(), -1);
  std::vector<int> rows;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (slopes[i] != 0.0) {
      row_of[i] = static_cast<int>(rows.size());
      rows.push_back(static_cast<int>(i));
    }
  }
  ReducedJacobian reduced(std::move(rows), rotated);
  const int stride = rotated.stride();
  eval.visit_gradients([&](std::size_t sample, int basis, std::span<const double> g) {
    reduced.add(row_of[sample], basis, stride, 1.0, g);
  });
  out.jacobian = chain_rotation(reduced, m, experiment, x_mid);
  return out;
}

}  // namespace pals
