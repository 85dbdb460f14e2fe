#include "pals/forward/chain.hpp"

namespace pals {

ReducedJacobian::ReducedJacobian(std::vector<int> row_ids, const ParameterVector& params)
    : rows(std::move(row_ids)),
      mat(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), params.flat_size())),
      active(static_cast<std::size_t>(params.size()), 0) {}

void ReducedJacobian::add(Eigen::Index row, int basis, int stride, double weight, std::span<const double> grad) {
  const Eigen::Index c0 = static_cast<Eigen::Index>(basis) * stride;
  for (int t = 0; t < stride; ++t) mat(row, c0 + t) += weight * grad[static_cast<std::size_t>(t)];
  active[static_cast<std::size_t>(basis)] = 1;
}

BlockJacobian chain_rotation(const ReducedJacobian& reduced, const ExtendedParameters& m, int experiment,
                             const Vec3& x_mid) {
  const ParameterVector& p = m.pals;
  const int stride = p.stride();
  const AcquisitionParams& acq = m.acq.at(static_cast<std::size_t>(experiment));
  int n_active = 0;
  for (char a : reduced.active) n_active += a ? 1 : 0;

  BlockJacobian out;
  out.rows = reduced.rows;
  const Eigen::Index nr = static_cast<Eigen::Index>(reduced.rows.size());
  out.block = Eigen::MatrixXd::Zero(nr, static_cast<Eigen::Index>(n_active) * stride + 5);
  out.cols.reserve(static_cast<std::size_t>(n_active * stride + 5));
  Eigen::MatrixXd acq_cols = Eigen::MatrixXd::Zero(nr, 5);
  Eigen::Index col = 0;
  for (int i = 0; i < p.size(); ++i) {
    if (!reduced.active[static_cast<std::size_t>(i)]) continue;
    const Eigen::MatrixXd r = rot_jacobian_acq(p, i, acq, x_mid);
    const auto jr = reduced.mat.middleCols(p.offset(i), stride);
    out.block.middleCols(col, stride).noalias() = jr * r.leftCols(stride);
    acq_cols.noalias() += jr * r.rightCols(5);
    for (int t = 0; t < stride; ++t) out.cols.push_back(static_cast<int>(p.offset(i)) + t);
    col += stride;
  }
  out.block.rightCols(5) = acq_cols;
  for (int t = 0; t < 5; ++t) out.cols.push_back(static_cast<int>(m.acq_offset(experiment)) + t);
  return out;
}

}  // namespace pals
