#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pals/core/basis.hpp"
#include "pals/core/errors.hpp"
#include "pals/core/field.hpp"
#include "pals/core/functions.hpp"
#include "pals/core/grid.hpp"
#include "pals/core/symmetric.hpp"
#include "support/oracles.hpp"

using namespace pals;

TEST_CASE("wendland examples") {
  CHECK(wendland_eval(WendlandOrder::psi1, 0.0) == 1.0);
  CHECK(wendland_eval(WendlandOrder::psi1, 1.0) == 0.0);
  CHECK(wendland_eval(WendlandOrder::psi1, 0.5) == 0.1875);
  CHECK(wendland_eval(WendlandOrder::psi1, 3.0) == 0.0);
  CHECK_THROWS_AS(wendland_eval(WendlandOrder::psi1, -1e-9), DomainError);
  CHECK_THROWS_AS(wendland_eval(WendlandOrder::psi2, std::nan("")), DomainError);
  CHECK_THROWS_AS(wendland_order_from_int(4), ConfigError);
}

TEST_CASE("wendland range, normalization and support") {
  for (int o = 0; o <= 3; ++o) {
    const auto order = wendland_order_from_int(o);
    if (o >= 1) CHECK(wendland_eval(order, 0.0) == 1.0);
    for (double r = 0.0; r < 1.5; r += 0.01) {
      const double v = wendland_eval(order, r);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (r >= 1.0) {
        CHECK(v == 0.0);
        CHECK(wendland_deriv(order, r) == 0.0);
      }
    }
  }
}

TEST_CASE("wendland derivative matches central differences") {
  for (int o = 0; o <= 3; ++o) {
    const auto order = wendland_order_from_int(o);
    for (double r = 0.05; r < 0.95; r += 0.1) {
      const double h = 1e-6;
      const double fd = (wendland_eval(order, r + h) - wendland_eval(order, r - h)) / (2 * h);
      CHECK(wendland_deriv(order, r) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("psi1 second difference is continuous across r = 1") {
  const auto psi = [](double r) { return wendland_eval(WendlandOrder::psi1, r); };
  const double h = 5e-5;
  const auto d2 = [&](double r) { return (psi(r + h) - 2 * psi(r) + psi(r - h)) / (h * h); };
  CHECK(std::abs(d2(1.0 - 1e-4) - d2(1.0 + 1e-4)) < 1e-6);
}

TEST_CASE("heaviside examples") {
  const HeavisideConfig cfg{0.1, 0.01};
  CHECK(heaviside_eval(cfg, -0.2) == 0.0);
  CHECK(heaviside_eval(cfg, 0.0) == 0.5);
  // -0.105 + 0.1 cancels, so the literal's rounding (~7e-18) becomes a
  // relative error near 3e-15 in the square; allow 1e-14.
  CHECK(std::abs(heaviside_eval(cfg, -0.105) - 0.003125) <= 1e-14 * 0.003125);
  CHECK(heaviside_eval(cfg, 0.2) == 1.0);
}

TEST_CASE("heaviside range, saturation and continuity") {
  const HeavisideConfig cfg{0.1, 0.01};
  for (double x = -0.3; x <= 0.3; x += 0.001) {
    const double v = heaviside_eval(cfg, x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (x <= -0.11) CHECK(v == 0.0);
    if (x >= 0.11) CHECK(v == 1.0);
  }
  const double h = 1e-8;
  // Constant bounds the slopes of sigma (1/(2 delta)) and sigma' (1/(4 delta eps)).
  const double c_val = 1.0 / (2 * cfg.delta) + 1.0;
  const double c_der = 1.0 / (4 * cfg.delta * cfg.eps) + 1.0;
  for (double knee : {-0.11, -0.09, 0.09, 0.11, 0.0}) {
    CHECK(std::abs(heaviside_eval(cfg, knee + h) - heaviside_eval(cfg, knee)) <= c_val * h);
    CHECK(std::abs(heaviside_eval(cfg, knee) - heaviside_eval(cfg, knee - h)) <= c_val * h);
    CHECK(std::abs(heaviside_deriv(cfg, knee + h) - heaviside_deriv(cfg, knee - h)) <= c_der * 2 * h);
  }
  for (double x = -0.105; x < 0.11; x += 0.01) {
    const double fd = (heaviside_eval(cfg, x + 1e-7) - heaviside_eval(cfg, x - 1e-7)) / 2e-7;
    CHECK(heaviside_deriv(cfg, x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("heaviside config validation and zero background") {
  CHECK_THROWS_AS((HeavisideConfig{0.1, 0.1}.validate()), ConfigError);
  CHECK_THROWS_AS((HeavisideConfig{0.1, 0.0}.validate()), ConfigError);
  const HeavisideConfig zb = HeavisideConfig::zero_background();
  CHECK(heaviside_eval(zb, 0.0) == 0.0);
  CHECK(heaviside_deriv(zb, 0.0) == 0.0);
}

TEST_CASE("pseudo norm examples") {
  CHECK(pseudo_norm(Vec3::Zero(), 1e-4) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(pseudo_norm(Vec3(3, 4, 0), 1e-4) == doctest::Approx(std::sqrt(25.0001)).epsilon(1e-15));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec3 v = oracle::random_vec(rng, -2, 2);
    CHECK(pseudo_norm_B(v, Mat3::Identity()) == pseudo_norm(v));
  }
  Mat3 bad = Mat3::Identity();
  bad(2, 2) = -5.0;
  CHECK_THROWS_AS(pseudo_norm_B(Vec3(0, 0, 1), bad), DomainError);
}

TEST_CASE("duplication matrix and tril_select") {
  const auto p = duplication_matrix();
  Vec6 e1 = Vec6::Zero();
  e1[0] = 1;
  const Vec9 v1 = p * e1;
  CHECK(v1[0] == 1.0);
  CHECK(v1.sum() == 1.0);
  Vec6 e2 = Vec6::Zero();
  e2[1] = 1;
  const Vec9 v2 = p * e2;
  // column-stacked: (2,1) is index 1, (1,2) is index 3
  CHECK(v2[1] == 1.0);
  CHECK(v2[3] == 1.0);
  CHECK(v2.sum() == 2.0);

  std::mt19937_64 rng(5);
  const Mat3 b = oracle::random_spd(rng, 0.5, 1.5);
  const Vec6 packed = pack_lower(b);
  CHECK((p * packed - vec(b)).norm() < 1e-15);
  CHECK(tril_select(vec(b)) == packed);
  CHECK(unpack_symmetric(packed) == b);
}

TEST_CASE("grid indexing") {
  const GridSpec g({4, 5, 6}, Vec3(1, 2, 3), Vec3(4, 5, 6));
  CHECK(g.voxel_count() == 120);
  CHECK(g.spacing() == Vec3(1, 1, 1));
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const auto ijk = g.unravel(i);
    CHECK(g.index(ijk[0], ijk[1], ijk[2]) == i);
  }
  CHECK(g.center(0, 0, 0) == Vec3(1.5, 2.5, 3.5));
  std::array<int, 3> ijk{};
  CHECK(g.nearest_voxel(Vec3(2.9, 2.1, 8.9), ijk));
  CHECK(ijk == std::array<int, 3>{1, 0, 5});
  CHECK_FALSE(g.nearest_voxel(Vec3(0, 0, 0), ijk));
  CHECK_THROWS_AS(GridSpec({0, 1, 1}), ConfigError);
}

TEST_CASE("field of the empty parameter vector is sigma(0)") {
  const GridSpec g = GridSpec::cube(8);
  const FieldResult r = field_eval(ParameterVector(BasisKind::ellipsoidal), g, {}, WendlandOrder::psi1, true);
  for (double v : r.field.values()) CHECK(v == 0.5);
  CHECK(r.jacobian->nonzeros() == 0);
}

TEST_CASE("one spherical basis at its center reads sigma(psi(sqrt(eps_norm)))") {
  ParameterVector m(BasisKind::spherical);
  m.add(SphericalBasis(1.0, 1.0, Vec3(2.5, 2.5, 2.5)));
  const Vec3 p(2.5, 2.5, 2.5);
  const PointFieldResult r = field_eval_points(m, std::span<const Vec3>(&p, 1));
  const double expect = heaviside_eval({}, wendland_eval(WendlandOrder::psi1, std::sqrt(kDefaultEpsNorm)));
  CHECK(r.values[0] == expect);
  CHECK(r.values[0] == doctest::Approx(1.0));
}

TEST_CASE("voxels outside every support read 0.5 with empty Jacobian rows") {
  const GridSpec g = GridSpec::cube(10);
  ParameterVector m(BasisKind::spherical);
  m.add(SphericalBasis(0.05, 1.0, Vec3(1.0, 1.0, 1.0)));
  const FieldResult r = field_eval(m, g, {}, WendlandOrder::psi1, true);
  std::vector<int> row_nnz(g.voxel_count(), 0);
  for (const auto& e : r.jacobian->entries()) ++row_nnz[static_cast<std::size_t>(e.row)];
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    const double dist = (g.center(i) - m.center(0)).norm();
    if (dist >= 1.0) {
      CHECK(r.field[i] == 0.5);
      CHECK(row_nnz[i] == 0);
    }
  }
}

TEST_CASE("Jacobian rows are empty exactly where sigma' vanishes or no support covers") {
  const GridSpec g = GridSpec::cube(12);
  std::mt19937_64 rng(11);
  ParameterVector m(BasisKind::ellipsoidal);
  for (int i = 0; i < 4; ++i) {
    m.add(EllipsoidBasis(oracle::uniform(rng, 0.3, 1.2), oracle::random_spd(rng, 0.6, 1.2),
                         Vec3::Constant(2.5) + oracle::random_vec(rng, -0.8, 0.8)));
  }
  const FieldOptions opt{HeavisideConfig::zero_background(), WendlandOrder::psi1};
  const GridFieldEvaluator e(m, g, opt);
  const SparseJacobian j = e.jacobian();
  std::vector<int> row_nnz(g.voxel_count(), 0);
  for (const auto& entry : j.entries()) ++row_nnz[static_cast<std::size_t>(entry.row)];
  int smooth = 0;
  for (std::size_t i = 0; i < g.voxel_count(); ++i) {
    bool covered = false;
    for (int b = 0; b < m.size(); ++b) {
      covered = covered || pseudo_norm_B(g.center(i) - m.center(b), m.form_matrix(b)) < 1.0;
    }
    const bool live = covered && e.slopes()[i] != 0.0;
    smooth += live;
    CHECK((row_nnz[i] > 0) == live);
  }
  CHECK(smooth > 50);
}

TEST_CASE("points at voxel centers are bitwise equal to the grid evaluation") {
  const GridSpec g = GridSpec::cube(10);
  std::mt19937_64 rng(2);
  for (BasisKind kind : {BasisKind::spherical, BasisKind::ellipsoidal, BasisKind::cholesky}) {
    ParameterVector m(kind);
    for (int i = 0; i < 5; ++i) {
      const Vec3 c = Vec3::Constant(2.5) + oracle::random_vec(rng, -1, 1);
      const double a = oracle::uniform(rng, -0.5, 1.0);
      const Mat3 b = oracle::random_spd(rng, 0.6, 1.4);
      if (kind == BasisKind::spherical) m.add(SphericalBasis(a, oracle::uniform(rng, 0.7, 1.5), c));
      if (kind == BasisKind::ellipsoidal) m.add(EllipsoidBasis(a, b, c));
      if (kind == BasisKind::cholesky) m.add(CholeskyBasis(a, pack_lower(Mat3(Eigen::LLT<Mat3>(b).matrixL())), c));
    }
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < g.voxel_count(); ++i) pts.push_back(g.center(i));
    const FieldResult gr = field_eval(m, g, {}, WendlandOrder::psi1, true);
    const PointFieldResult pr = field_eval_points(m, pts, {}, WendlandOrder::psi1, true);
    REQUIRE(pr.values.size() == gr.field.size());
    bool same = true;
    for (std::size_t i = 0; i < pts.size(); ++i) same = same && pr.values[i] == gr.field[i];
    CHECK(same);
    const auto& a = gr.jacobian->entries();
    const auto& b = pr.jacobian->entries();
    REQUIRE(a.size() == b.size());
    bool same_j = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same_j = same_j && a[i].row == b[i].row && a[i].col == b[i].col && a[i].value == b[i].value;
    }
    CHECK(same_j);
  }
}

TEST_CASE("cholesky field equals ellipsoid field with B = L L^T") {
  const GridSpec g = GridSpec::cube(12);
  std::mt19937_64 rng(8);
  ParameterVector chol(BasisKind::cholesky);
  ParameterVector ell(BasisKind::ellipsoidal);
  for (int i = 0; i < 6; ++i) {
    Mat3 l = Mat3::Zero();
    for (const auto& [r, c] : kLowerEntries) l(r, c) = r == c ? oracle::uniform(rng, 0.7, 1.5) : oracle::uniform(rng, -0.4, 0.4);
    const Vec3 c = Vec3::Constant(2.5) + oracle::random_vec(rng, -1, 1);
    const double a = oracle::uniform(rng, 0.1, 0.8);
    chol.add(CholeskyBasis(a, pack_lower(l), c));
    ell.add(EllipsoidBasis(a, Mat3(l * l.transpose()), c));
  }
  const ScalarField fc = field_eval(chol, g).field;
  const ScalarField fe = field_eval(ell, g).field;
  double worst = 0.0;
  for (std::size_t i = 0; i < fc.size(); ++i) worst = std::max(worst, std::abs(fc[i] - fe[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("singular ellipsoid basis is rejected") {
  ParameterVector m(BasisKind::ellipsoidal);
  Mat3 b = Mat3::Identity();
  b(2, 2) = 0.0;
  m.add(EllipsoidBasis(1.0, b, Vec3::Constant(2.5)));
  CHECK_THROWS_AS(field_eval(m, GridSpec::cube(6)), SingularBasisError);
}

TEST_CASE("field Jacobian matches central differences for every kind") {
  // Two overlapping bases with small weights keep every sample on the linear
  // branch of sigma and away from the support shell.
  std::mt19937_64 rng(21);
  const HeavisideConfig cfg{};
  for (BasisKind kind : {BasisKind::spherical, BasisKind::ellipsoidal, BasisKind::cholesky}) {
    for (int trial = 0; trial < 5; ++trial) {
      ParameterVector m(kind);
      for (int i = 0; i < 2; ++i) {
        const Mat3 b = oracle::random_spd(rng, 0.9, 1.3);
        const Vec3 c = Vec3::Constant(2.5) + oracle::random_vec(rng, -0.2, 0.2);
        const double a = oracle::uniform(rng, 0.03, 0.04);
        if (kind == BasisKind::spherical) m.add(SphericalBasis(a, oracle::uniform(rng, 0.8, 1.1), c));
        if (kind == BasisKind::ellipsoidal) m.add(EllipsoidBasis(a, b, c));
        if (kind == BasisKind::cholesky) m.add(CholeskyBasis(a, pack_lower(Mat3(Eigen::LLT<Mat3>(b).matrixL())), c));
      }
      std::vector<Vec3> pts;
      while (pts.size() < 12) {
        const Vec3 p = Vec3::Constant(2.5) + oracle::random_vec(rng, -0.6, 0.6);
        bool ok = true;
        for (int b = 0; b < m.size(); ++b) {
          const double r = pseudo_norm_B(p - m.center(b), m.form_matrix(b));
          ok = ok && r > 0.1 && r < 0.9;
        }
        if (ok) pts.push_back(p);
      }
      const PointFieldResult r = field_eval_points(m, pts, cfg, WendlandOrder::psi1, true);
      const auto f = [&](const Eigen::VectorXd& x) {
        const ParameterVector mx = ParameterVector::from_flat(kind, std::span<const double>(x.data(), x.size()));
        return oracle::as_vector(field_eval_points(mx, pts, cfg).values);
      };
      const double err = oracle::max_rel_err(r.jacobian->to_dense(), oracle::fd_jacobian(f, m.flat()));
      CHECK(err < 1e-5);
    }
  }
}

TEST_CASE("binarize examples") {
  const GridSpec g = GridSpec::cube(4);
  const ScalarField low = binarize(ScalarField::constant(g, 0.5), 0.7);
  const ScalarField high = binarize(ScalarField::constant(g, 1.0), 0.7);
  const ScalarField at = binarize(ScalarField::constant(g, 0.7), 0.7);
  for (double v : low.values()) CHECK(v == 0.0);
  for (double v : high.values()) CHECK(v == 1.0);
  for (double v : at.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(binarize(ScalarField::constant(g, 0.5), 1.0), ConfigError);
  CHECK_THROWS_AS(binarize(ScalarField::constant(g, 0.5), 0.0), ConfigError);
}

TEST_CASE("fill_enclosed closes cavities and leaves open ones") {
  const GridSpec g = GridSpec::cube(9);
  std::vector<double> shell(g.voxel_count(), 0.0), cup(g.voxel_count(), 0.0);
  for (int k = 2; k <= 6; ++k) {
    for (int j = 2; j <= 6; ++j) {
      for (int i = 2; i <= 6; ++i) {
        const bool wall = i == 2 || i == 6 || j == 2 || j == 6 || k == 2 || k == 6;
        if (wall) shell[g.index(i, j, k)] = 1.0;
        if (wall && k != 6) cup[g.index(i, j, k)] = 1.0;
      }
    }
  }
  const ScalarField filled = fill_enclosed(ScalarField(g, shell));
  CHECK(filled.sum() == 125.0);
  CHECK(filled.at(4, 4, 4) == 1.0);
  CHECK(filled.at(0, 0, 0) == 0.0);
  const ScalarField open = fill_enclosed(ScalarField(g, cup));
  CHECK(open.sum() == ScalarField(g, cup).sum());
  CHECK(fill_enclosed(ScalarField::constant(g, 1.0)).sum() == static_cast<double>(g.voxel_count()));
}

TEST_CASE("sparse Jacobian sorts and sums duplicates") {
  const SparseJacobian j(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {0, 0, -1.0}});
  REQUIRE(j.nonzeros() == 3);
  CHECK(j.entries()[0].col == 0);
  CHECK(j.entries()[2].value == 1.5);
  CHECK_THROWS_AS(SparseJacobian(1, 1, {{0, 0, std::nan("")}}), NumericalError);
}
