#include "pals/core/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pals/core/errors.hpp"
#include "pals/core/symmetric.hpp"
#include "pals/forward/neighbor_index.hpp"
#include "pals/simd/kernels.hpp"

namespace pals {

namespace {

// Shape matrix of basis i after checking it is positive definite.
Mat3 checked_form(const ParameterVector& params, int i) {
  const Mat3 a = params.form_matrix(i);
  Eigen::LLT<Mat3> llt(a);
  if (!a.allFinite() || llt.info() != Eigen::Success || !(a.determinant() > 0.0)) {
    throw SingularBasisError("basis " + std::to_string(i) + " (" + std::string(kind_name(params.kind())) +
                             ") has a shape matrix that is not positive definite");
  }
  if (!params.center(i).allFinite() || !std::isfinite(params.alpha(i))) {
    throw DomainError("basis " + std::to_string(i) + " has non-finite parameters");
  }
  return a;
}

simd::QuadForm quad_form_of(const Mat3& a) { return {a(0, 0), a(1, 0), a(2, 0), a(1, 1), a(2, 1), a(2, 2)}; }

}  // namespace

ScalarField::ScalarField(GridSpec grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.voxel_count()) {
    throw ContractError("scalar field: " + std::to_string(values_.size()) + " values for " +
                        std::to_string(grid_.voxel_count()) + " voxels");
  }
}

ScalarField ScalarField::constant(const GridSpec& grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.voxel_count(), value));
}

double ScalarField::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

SparseJacobian::SparseJacobian(int n_rows, int n_cols, std::vector<JacobianEntry> entries)
    : n_rows_(n_rows), n_cols_(n_cols) {
  std::sort(entries.begin(), entries.end(), [](const JacobianEntry& a, const JacobianEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries_.reserve(entries.size());
  for (const JacobianEntry& e : entries) {
    if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
      throw ContractError("sparse jacobian: entry out of range");
    }
    if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  for (const JacobianEntry& e : entries_) {
    if (!std::isfinite(e.value)) throw NumericalError("sparse jacobian: non-finite entry");
  }
}

Eigen::SparseMatrix<double, Eigen::RowMajor> SparseJacobian::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries_.size());
  for (const JacobianEntry& e : entries_) t.emplace_back(e.row, e.col, e.value);
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(n_rows_, n_cols_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::MatrixXd SparseJacobian::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_rows_, n_cols_);
  for (const JacobianEntry& e : entries_) m(e.row, e.col) = e.value;
  return m;
}

void basis_gradient(const ParameterVector& params, int basis, const Vec3& z, double r, double psi, double dpsi,
                    double slope, std::span<double> grad) {
  const Eigen::VectorXd& m = params.flat();
  const Eigen::Index o = params.offset(basis);
  const double alpha = m[o];
  grad[0] = slope * psi;
  // Chain factor d u / d q, with r = sqrt(q + eps).
  const double c = slope * alpha * dpsi / (2.0 * r);
  switch (params.kind()) {
    case BasisKind::spherical: {
      const double beta = m[o + 1];
      grad[1] = c * (2.0 * beta * z.squaredNorm());
      const double s = -2.0 * beta * beta * c;
      for (int a = 0; a < 3; ++a) grad[static_cast<std::size_t>(2 + a)] = s * z[a];
      break;
    }
    case BasisKind::ellipsoidal: {
      grad[1] = c * (z[0] * z[0]);
      grad[2] = c * (2.0 * z[1] * z[0]);
      grad[3] = c * (2.0 * z[2] * z[0]);
      grad[4] = c * (z[1] * z[1]);
      grad[5] = c * (2.0 * z[2] * z[1]);
      grad[6] = c * (z[2] * z[2]);
      const Vec3 bz = unpack_symmetric(m.segment<6>(o + 1)) * z;
      for (int a = 0; a < 3; ++a) grad[static_cast<std::size_t>(7 + a)] = -2.0 * c * bz[a];
      break;
    }
    case BasisKind::cholesky: {
      const Mat3 l = unpack_lower(m.segment<6>(o + 1));
      const Vec3 ltz = l.transpose() * z;
      // d q / d L = 2 z (L^T z)^T, lower part.
      for (int e = 0; e < 6; ++e) {
        const auto& rc = kLowerEntries[static_cast<std::size_t>(e)];
        grad[static_cast<std::size_t>(1 + e)] = c * (2.0 * z[rc[0]] * ltz[rc[1]]);
      }
      const Vec3 az = l * ltz;
      for (int a = 0; a < 3; ++a) grad[static_cast<std::size_t>(7 + a)] = -2.0 * c * az[a];
      break;
    }
  }
}

GridFieldEvaluator::GridFieldEvaluator(const ParameterVector& params, const GridSpec& grid, const FieldOptions& options)
    : params_(params), grid_(grid), options_(options) {
  options_.heaviside.validate();
  const std::size_t n_vox = grid_.voxel_count();
  sums_.assign(n_vox, 0.0);
  values_.assign(n_vox, 0.0);
  slopes_.assign(n_vox, 0.0);

  const simd::KernelTable& kernels = simd::active_kernels();
  const Vec3& h = grid_.spacing();
  const Vec3& org = grid_.origin();
  const int n_basis = params_.size();
  boxes_.resize(static_cast<std::size_t>(n_basis));

  for (int b = 0; b < n_basis; ++b) {
    const Mat3 a = checked_form(params_, b);
    const Mat3 a_inv = a.inverse();
    const Vec3 c = params_.center(b);
    Box& box = boxes_[static_cast<std::size_t>(b)];
    for (int ax = 0; ax < 3; ++ax) {
      // Support half-width along the axis, inflated by one voxel.
      const double hw = std::sqrt(std::max(a_inv(ax, ax), 0.0)) + h[ax];
      const double lo = std::floor((c[ax] - hw - org[ax]) / h[ax] - 0.5);
      const double hi = std::ceil((c[ax] + hw - org[ax]) / h[ax] - 0.5);
      const double n = grid_.dim(ax);
      box.lo[ax] = static_cast<int>(std::clamp(lo, 0.0, n));
      box.hi[ax] = static_cast<int>(std::clamp(hi, -1.0, n - 1.0));
    }
    if (box.lo[0] > box.hi[0] || box.lo[1] > box.hi[1] || box.lo[2] > box.hi[2]) continue;

    simd::RowArgs args{};
    args.x0 = org[0];
    args.hx = h[0];
    args.cx = c[0];
    args.i_begin = box.lo[0];
    args.form = quad_form_of(a);
    args.alpha = params_.alpha(b);
    args.eps_norm = params_.eps_norm();
    args.order = options_.order;
    const std::size_t len = static_cast<std::size_t>(box.hi[0] - box.lo[0] + 1);
    for (int k = box.lo[2]; k <= box.hi[2]; ++k) {
      const double zz = grid_.center_coord(2, k) - c[2];
      for (int j = box.lo[1]; j <= box.hi[1]; ++j) {
        const double zy = grid_.center_coord(1, j) - c[1];
        args.coeffs = simd::row_coefficients(args.form, zy, zz);
        const std::size_t row = grid_.index(box.lo[0], j, k);
        kernels.accumulate_row(args, std::span<double>(sums_.data() + row, len));
      }
    }
  }
  kernels.heaviside(simd::HeavisideParams::from(options_.heaviside), sums_, values_, slopes_);
}

void GridFieldEvaluator::visit_gradients(const GradientVisitor& visit) const {
  const simd::KernelTable& kernels = simd::active_kernels();
  const Vec3& h = grid_.spacing();
  const Vec3& org = grid_.origin();
  const int stride = params_.stride();
  std::vector<double> grad(static_cast<std::size_t>(stride));
  std::vector<double> radius, psi, dpsi;
  for (int b = 0; b < params_.size(); ++b) {
    const Box& box = boxes_[static_cast<std::size_t>(b)];
    if (box.lo[0] > box.hi[0] || box.lo[1] > box.hi[1] || box.lo[2] > box.hi[2]) continue;
    const Mat3 a = params_.form_matrix(b);
    const Vec3 c = params_.center(b);
    simd::RowArgs args{};
    args.x0 = org[0];
    args.hx = h[0];
    args.cx = c[0];
    args.i_begin = box.lo[0];
    args.form = quad_form_of(a);
    args.alpha = params_.alpha(b);
    args.eps_norm = params_.eps_norm();
    args.order = options_.order;
    const std::size_t len = static_cast<std::size_t>(box.hi[0] - box.lo[0] + 1);
    radius.resize(len);
    psi.resize(len);
    dpsi.resize(len);
    for (int k = box.lo[2]; k <= box.hi[2]; ++k) {
      const double zz = grid_.center_coord(2, k) - c[2];
      for (int j = box.lo[1]; j <= box.hi[1]; ++j) {
        const double zy = grid_.center_coord(1, j) - c[1];
        args.coeffs = simd::row_coefficients(args.form, zy, zz);
        kernels.basis_row(args, radius, psi, dpsi);
        const std::size_t row = grid_.index(box.lo[0], j, k);
        for (std::size_t n = 0; n < len; ++n) {
          if (!(radius[n] < 1.0)) continue;
          const double slope = slopes_[row + n];
          if (slope == 0.0) continue;
          const int i = box.lo[0] + static_cast<int>(n);
          const Vec3 z(grid_.center_coord(0, i) - c[0], zy, zz);
          basis_gradient(params_, b, z, radius[n], psi[n], dpsi[n], slope, grad);
          visit(row + n, b, grad);
        }
      }
    }
  }
}

SparseJacobian GridFieldEvaluator::jacobian() const {
  std::vector<JacobianEntry> entries;
  const int stride = params_.stride();
  visit_gradients([&](std::size_t sample, int basis, std::span<const double> g) {
    const int col0 = basis * stride;
    for (int t = 0; t < stride; ++t) {
      entries.push_back({static_cast<int>(sample), col0 + t, g[static_cast<std::size_t>(t)]});
    }
  });
  return SparseJacobian(static_cast<int>(grid_.voxel_count()), static_cast<int>(params_.flat_size()),
                        std::move(entries));
}

PointFieldEvaluator::PointFieldEvaluator(const ParameterVector& params, std::span<const Vec3> points,
                                         const FieldOptions& options)
    : params_(params), points_(points.begin(), points.end()), options_(options) {
  const NeighborIndex index(points);
  evaluate(index);
}

PointFieldEvaluator::PointFieldEvaluator(const ParameterVector& params, const NeighborIndex& index,
                                         const FieldOptions& options)
    : params_(params), options_(options) {
  points_.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) points_.push_back(index.point(i));
  evaluate(index);
}

void PointFieldEvaluator::evaluate(const NeighborIndex& index) {
  options_.heaviside.validate();
  for (const Vec3& p : points_) {
    if (!p.allFinite()) throw DomainError("field evaluation: non-finite sample point");
  }
  const std::size_t n = points_.size();
  sums_.assign(n, 0.0);
  values_.assign(n, 0.0);
  slopes_.assign(n, 0.0);
  covered_.assign(static_cast<std::size_t>(params_.size()), {});
  std::vector<int> candidates;
  for (int b = 0; b < params_.size(); ++b) {
    const Mat3 a = checked_form(params_, b);
    const Vec3 c = params_.center(b);
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Mat3>(a, Eigen::EigenvaluesOnly).eigenvalues()[0];
    const double reach = (1.0 / std::sqrt(lambda_min)) * (1.0 + 1e-9) + 1e-12;
    index.query_ball(c, reach, candidates);
    const simd::QuadForm form = quad_form_of(a);
    const double alpha = params_.alpha(b);
    auto& covered = covered_[static_cast<std::size_t>(b)];
    for (int p : candidates) {
      const Vec3& x = points_[static_cast<std::size_t>(p)];
      const double zx = x[0] - c[0];
      const simd::RowCoefficients rc = simd::row_coefficients(form, x[1] - c[1], x[2] - c[2]);
      const double r = std::sqrt(simd::quad_value(form, rc, zx) + params_.eps_norm());
      if (r < 1.0) {
        sums_[static_cast<std::size_t>(p)] += alpha * simd::wendland_inside(options_.order, r).value;
        covered.push_back(p);
      }
    }
  }
  const simd::HeavisideParams hp = simd::HeavisideParams::from(options_.heaviside);
  for (std::size_t i = 0; i < n; ++i) {
    const simd::HeavisideValue v = simd::heaviside_scalar(hp, sums_[i]);
    values_[i] = v.value;
    slopes_[i] = v.slope;
  }
}

void PointFieldEvaluator::visit_gradients(const GradientVisitor& visit) const {
  std::vector<double> grad(static_cast<std::size_t>(params_.stride()));
  for (int b = 0; b < params_.size(); ++b) {
    const Mat3 a = params_.form_matrix(b);
    const simd::QuadForm form = quad_form_of(a);
    const Vec3 c = params_.center(b);
    for (int p : covered_[static_cast<std::size_t>(b)]) {
      const double slope = slopes_[static_cast<std::size_t>(p)];
      if (slope == 0.0) continue;
      const Vec3& x = points_[static_cast<std::size_t>(p)];
      const Vec3 z(x[0] - c[0], x[1] - c[1], x[2] - c[2]);
      const simd::RowCoefficients rc = simd::row_coefficients(form, z[1], z[2]);
      const double r = std::sqrt(simd::quad_value(form, rc, z[0]) + params_.eps_norm());
      const simd::WendlandValue w = simd::wendland_inside(options_.order, r);
      basis_gradient(params_, b, z, r, w.value, w.slope, slope, grad);
      visit(static_cast<std::size_t>(p), b, grad);
    }
  }
}

SparseJacobian PointFieldEvaluator::jacobian() const {
  std::vector<JacobianEntry> entries;
  const int stride = params_.stride();
  visit_gradients([&](std::size_t sample, int basis, std::span<const double> g) {
    for (int t = 0; t < stride; ++t) {
      entries.push_back({static_cast<int>(sample), basis * stride + t, g[static_cast<std::size_t>(t)]});
    }
  });
  return SparseJacobian(static_cast<int>(points_.size()), static_cast<int>(params_.flat_size()), std::move(entries));
}

FieldResult field_eval(const ParameterVector& params, const GridSpec& grid, const HeavisideConfig& cfg,
                       WendlandOrder order, bool want_jacobian) {
  const GridFieldEvaluator eval(params, grid, FieldOptions{cfg, order});
  FieldResult out{eval.field(), std::nullopt};
  if (want_jacobian) out.jacobian = eval.jacobian();
  return out;
}

PointFieldResult field_eval_points(const ParameterVector& params, std::span<const Vec3> points,
                                   const HeavisideConfig& cfg, WendlandOrder order, bool want_jacobian) {
  const PointFieldEvaluator eval(params, points, FieldOptions{cfg, order});
  PointFieldResult out{eval.values(), std::nullopt};
  if (want_jacobian) out.jacobian = eval.jacobian();
  return out;
}

ScalarField binarize(const ScalarField& field, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("binarize: threshold must lie in (0,1)");
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = field[i] > threshold ? 1.0 : 0.0;
  return ScalarField(field.grid(), std::move(out));
}

ScalarField fill_enclosed(const ScalarField& binary) {
  const GridSpec& g = binary.grid();
  const auto [n0, n1, n2] = g.dims();
  std::vector<char> outside(binary.size(), 0);
  std::vector<std::size_t> stack;
  const auto visit = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n0 || j >= n1 || k >= n2) return;
    const std::size_t v = g.index(i, j, k);
    if (outside[v] || binary[v] > 0.5) return;
    outside[v] = 1;
    stack.push_back(v);
  };
  for (int k = 0; k < n2; ++k) {
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        if (i == 0 || j == 0 || k == 0 || i == n0 - 1 || j == n1 - 1 || k == n2 - 1) visit(i, j, k);
      }
    }
  }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    const auto [i, j, k] = g.unravel(v);
    visit(i - 1, j, k);
    visit(i + 1, j, k);
    visit(i, j - 1, k);
    visit(i, j + 1, k);
    visit(i, j, k - 1);
    visit(i, j, k + 1);
  }
  std::vector<double> out(binary.size());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = outside[v] ? 0.0 : 1.0;
  return ScalarField(g, std::move(out));
}

}  // namespace pals
