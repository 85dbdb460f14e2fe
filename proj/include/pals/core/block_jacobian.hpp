#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace pals {

/// Dense block of a larger, mostly empty Jacobian: entries live at
/// (rows[a], cols[b]) and everything else is zero.
struct BlockJacobian {
  std::vector<int> rows;
  std::vector<int> cols;
  Eigen::MatrixXd block;

  Eigen::MatrixXd to_dense(int n_rows, int n_cols) const;

  /// normal += w B^T B and grad += w B^T r over the columns that col_map sends
  /// to a variable index (col_map[c] < 0 drops column c).
  void accumulate_normal(double weight, const Eigen::VectorXd& residual, std::span<const int> col_map,
                         Eigen::MatrixXd& normal, Eigen::VectorXd& grad) const;
};

}  // namespace pals
