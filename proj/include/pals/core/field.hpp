#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "pals/core/basis.hpp"
#include "pals/core/functions.hpp"
#include "pals/core/grid.hpp"

namespace pals {

class NeighborIndex;

struct FieldOptions {
  HeavisideConfig heaviside{};
  WendlandOrder order = WendlandOrder::psi1;
};

/// Per-voxel values on a grid, x-fastest.
class ScalarField {
 public:
  ScalarField(GridSpec grid, std::vector<double> values);
  static ScalarField constant(const GridSpec& grid, double value);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(int i, int j, int k) const { return values_[grid_.index(i, j, k)]; }
  std::size_t size() const { return values_.size(); }
  double sum() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

struct JacobianEntry {
  int row;
  int col;
  double value;
};

/// Sparse d(samples)/d(parameters): entries sorted by (row, col), unique.
class SparseJacobian {
 public:
  /// Sorts and sums duplicates; throws NumericalError on non-finite values.
  SparseJacobian(int n_rows, int n_cols, std::vector<JacobianEntry> entries);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  const std::vector<JacobianEntry>& entries() const { return entries_; }
  std::size_t nonzeros() const { return entries_.size(); }
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_eigen() const;
  Eigen::MatrixXd to_dense() const;

 private:
  int n_rows_;
  int n_cols_;
  std::vector<JacobianEntry> entries_;
};

/// Callback receiving du(sample)/d(m_basis) for one basis at one sample.
/// `grad` has one entry per parameter of the basis, in flat order.
using GradientVisitor = std::function<void(std::size_t sample, int basis, std::span<const double> grad)>;

/// Evaluates u on every voxel center of a grid. Keeps the pre-sigmoid sums and
/// sigma' so gradients can be streamed to a consumer without building J.
class GridFieldEvaluator {
 public:
  GridFieldEvaluator(const ParameterVector& params, const GridSpec& grid, const FieldOptions& options = {});

  const GridSpec& grid() const { return grid_; }
  const ParameterVector& params() const { return params_; }
  const std::vector<double>& sums() const { return sums_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }
  ScalarField field() const { return ScalarField(grid_, values_); }

  /// Visits every (voxel, basis) pair with r < 1 and sigma' != 0.
  void visit_gradients(const GradientVisitor& visit) const;
  SparseJacobian jacobian() const;

 private:
  struct Box {
    int lo[3];
    int hi[3];  // inclusive; lo > hi means empty
  };
  ParameterVector params_;
  GridSpec grid_;
  FieldOptions options_;
  std::vector<Box> boxes_;
  std::vector<double> sums_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Same formulas as GridFieldEvaluator at arbitrary points. Bases only visit
/// the points a NeighborIndex reports inside their support ball.
class PointFieldEvaluator {
 public:
  PointFieldEvaluator(const ParameterVector& params, std::span<const Vec3> points, const FieldOptions& options = {});
  PointFieldEvaluator(const ParameterVector& params, const NeighborIndex& index, const FieldOptions& options = {});

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& sums() const { return sums_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }

  void visit_gradients(const GradientVisitor& visit) const;
  SparseJacobian jacobian() const;

 private:
  ParameterVector params_;
  std::vector<Vec3> points_;
  FieldOptions options_;
  std::vector<std::vector<int>> covered_;  // per basis, points with r < 1
  std::vector<double> sums_;
  std::vector<double> values_;
  std::vector<double> slopes_;

  void evaluate(const NeighborIndex& index);
};

struct FieldResult {
  ScalarField field;
  std::optional<SparseJacobian> jacobian;
};

struct PointFieldResult {
  std::vector<double> values;
  std::optional<SparseJacobian> jacobian;
};

FieldResult field_eval(const ParameterVector& params, const GridSpec& grid, const HeavisideConfig& cfg = {},
                       WendlandOrder order = WendlandOrder::psi1, bool want_jacobian = false);

PointFieldResult field_eval_points(const ParameterVector& params, std::span<const Vec3> points,
                                   const HeavisideConfig& cfg = {}, WendlandOrder order = WendlandOrder::psi1,
                                   bool want_jacobian = false);

/// 1 where u > threshold, else 0. ConfigError unless 0 < threshold < 1.
ScalarField binarize(const ScalarField& field, double threshold = 0.7);

/// Sets background voxels that are not 6-connected to the domain boundary.
/// A surface-only fit bounds its solid without constraining the inside.
ScalarField fill_enclosed(const ScalarField& binary);

/// du/dm for one basis at one sample; grad.size() == stride. Exposed for the
/// finite-difference oracles and the point-cloud model.
void basis_gradient(const ParameterVector& params, int basis, const Vec3& z, double r, double psi, double dpsi,
                    double slope, std::span<double> grad);

}  // namespace pals
