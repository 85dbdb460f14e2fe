#include "pals/core/block_jacobian.hpp"

#include "pals/core/errors.hpp"

namespace pals {

Eigen::MatrixXd BlockJacobian::to_dense(int n_rows, int n_cols) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_rows, n_cols);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      m(rows[a], cols[b]) += block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return m;
}

void BlockJacobian::accumulate_normal(double weight, const Eigen::VectorXd& residual, std::span<const int> col_map,
                                      Eigen::MatrixXd& normal, Eigen::VectorXd& grad) const {
  if (rows.empty() || cols.empty()) return;
  std::vector<int> local;
  std::vector<int> target;
  for (std::size_t b = 0; b < cols.size(); ++b) {
    const int c = cols[b];
    if (c < 0 || static_cast<std::size_t>(c) >= col_map.size()) throw ContractError("block jacobian: column out of range");
    if (col_map[static_cast<std::size_t>(c)] >= 0) {
      local.push_back(static_cast<int>(b));
      target.push_back(col_map[static_cast<std::size_t>(c)]);
    }
  }
  if (local.empty()) return;
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(local.size());
  Eigen::MatrixXd sub(nr, nc);
  for (Eigen::Index b = 0; b < nc; ++b) sub.col(b) = block.col(local[static_cast<std::size_t>(b)]);
  Eigen::VectorXd r(nr);
  for (Eigen::Index a = 0; a < nr; ++a) r[a] = residual[rows[static_cast<std::size_t>(a)]];

  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(nc, nc);
  jtj.selfadjointView<Eigen::Lower>().rankUpdate(sub.transpose(), weight);
  const Eigen::VectorXd jtr = weight * (sub.transpose() * r);
  for (Eigen::Index b = 0; b < nc; ++b) {
    const int tb = target[static_cast<std::size_t>(b)];
    grad[tb] += jtr[b];
    for (Eigen::Index a = b; a < nc; ++a) {
      const int ta = target[static_cast<std::size_t>(a)];
      normal(ta, tb) += jtj(a, b);
      if (ta != tb) normal(tb, ta) += jtj(a, b);
    }
  }
}

}  // namespace pals
