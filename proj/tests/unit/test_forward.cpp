#include <doctest.h>

#include <numeric>
#include <random>

#include "pals/calib/rotation.hpp"
#include "pals/core/errors.hpp"
#include "pals/core/field.hpp"
#include "pals/forward/dip.hpp"
#include "pals/forward/neighbor_index.hpp"
#include "pals/forward/point_cloud.hpp"
#include "pals/forward/silhouette.hpp"
#include "support/oracles.hpp"

using namespace pals;

namespace {

const FieldOptions kZeroBg{HeavisideConfig::zero_background(), WendlandOrder::psi1};

// Which of the five pieces of sigma each pre-sigmoid sum falls on.
std::vector<int> sigma_pieces(const HeavisideConfig& h, const std::vector<double>& sums) {
  std::vector<int> out;
  for (double s : sums) {
    const double x = s - h.offset;
    out.push_back(x < -h.delta - h.eps ? 0 : x < -h.delta + h.eps ? 1 : x < h.delta - h.eps ? 2 : x < h.delta + h.eps ? 3 : 4);
  }
  return out;
}

ExtendedParameters random_model(BasisKind kind, std::mt19937_64& rng) {
  ParameterVector p(kind);
  for (int i = 0; i < 3; ++i) {
    const Vec3 c = Vec3::Constant(2.5) + oracle::random_vec(rng, -0.4, 0.4);
    const double a = oracle::uniform(rng, 0.3, 1.0);
    if (kind == BasisKind::spherical) p.add(SphericalBasis(a, oracle::uniform(rng, 0.7, 1.1), c));
    if (kind == BasisKind::ellipsoidal) p.add(EllipsoidBasis(a, oracle::random_spd(rng, 0.9, 1.4), c));
  }
  const auto acq = [&] {
    return AcquisitionParams{oracle::uniform(rng, -3, 3), oracle::uniform(rng, -1.5, 1.5), oracle::random_vec(rng, -0.2, 0.2)};
  };
  return ExtendedParameters(p, {acq(), acq()});
}

ExtendedParameters with_flat(const ExtendedParameters& like, const Eigen::VectorXd& x) {
  ExtendedParameters m = like;
  m.assign(x);
  return m;
}

}  // namespace

TEST_CASE("dip trace of the full field") {
  const GridSpec g({6, 7, 8}, Vec3::Zero(), Vec3(3, 3.5, 4));
  const std::vector<double> ones(g.voxel_count(), 1.0);
  const Eigen::VectorXd t = dip_trace(ones, g);
  REQUIRE(t.size() == 8);
  for (Eigen::Index k = 0; k < t.size(); ++k) CHECK(t[k] == doctest::Approx(6 * 7 * g.voxel_volume()).epsilon(1e-14));
}

TEST_CASE("dip trace total equals the soft volume for any pose") {
  const GridSpec g = GridSpec::cube(16);
  std::mt19937_64 rng(1);
  const ExtendedParameters m = random_model(BasisKind::ellipsoidal, rng);
  for (int e = 0; e < 2; ++e) {
    const ForwardResult r = dip_forward(m, g, e, kZeroBg);
    const ScalarField u = GridFieldEvaluator(rotate_params(m.pals, m.acq[static_cast<std::size_t>(e)], g.midpoint()), g, kZeroBg).field();
    CHECK(r.data.sum() == doctest::Approx(u.sum() * g.voxel_volume()).epsilon(1e-12));
  }
}

TEST_CASE("dip Jacobian matches central differences, acquisition columns included") {
  const GridSpec g = GridSpec::cube(12);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const ExtendedParameters m = random_model(trial % 2 ? BasisKind::spherical : BasisKind::ellipsoidal, rng);
    const ForwardResult r = dip_forward(m, g, 1, kZeroBg, true);
    const Eigen::MatrixXd analytic = r.jacobian->to_dense(g.dim(2), static_cast<int>(m.size()));
    const auto f = [&](const Eigen::VectorXd& x) {
      const ExtendedParameters mx = with_flat(m, x);
      const GridFieldEvaluator e(rotate_params(mx.pals, mx.acq[1], g.midpoint()), g, kZeroBg);
      return oracle::Piece{dip_trace(e.values(), g), sigma_pieces(kZeroBg.heaviside, e.sums())};
    };
    const oracle::CheckedFd fd = oracle::fd_jacobian_checked(f, m.flat());
    CHECK(fd.valid_count() * 2 > static_cast<int>(m.size()));
    CHECK(oracle::max_rel_err(analytic, fd) < 1e-5);
    // experiment 0's block is untouched
    CHECK(analytic.middleCols(m.acq_offset(0), 5).norm() == 0.0);
  }
}

TEST_CASE("boundary run examples") {
  const std::vector<double> ray{0, 0, 0.3, 0.9, 1.0, 1.0, 0.2};
  CHECK(sfs_boundary_run(ray) == std::vector<int>{2, 3, 4});
  CHECK(sfs_boundary_run(std::vector<double>(9, 0.0)).empty());
  // The leading 0 is background (below the floor); the run starts at 0.25.
  CHECK(sfs_boundary_run(std::vector<double>{0, 0.25, 0.5, 0.75, 1}) == std::vector<int>{1, 2, 3, 4});
  CHECK(sfs_boundary_run(std::vector<double>{0.1, 0.25, 0.5, 0.75, 1}) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(sfs_boundary_run(std::vector<double>{0.04, 0.05, 0.04}).empty());
}

TEST_CASE("softmax vote examples") {
  const std::vector<double> ray{0, 0, 0.3, 0.9, 1.0, 1.0, 0.2};
  const std::vector<int> run = sfs_boundary_run(ray);
  const double w = std::exp(-50 * 0.1), w0 = std::exp(-50 * 0.7);
  const double expect = (0.3 * w0 + 0.9 * w + 1.0) / (w0 + w + 1.0);
  CHECK(softmax_vote(ray, run, 50).value == doctest::Approx(expect).epsilon(1e-14));
  CHECK(softmax_vote(ray, run, 50).value == doctest::Approx(0.9993).epsilon(1e-4));
  CHECK(std::abs(softmax_vote(ray, run, 1e3).value - 1.0) < 1e-3);
  CHECK(softmax_vote(ray, run, 1e-9).value == doctest::Approx((0.3 + 0.9 + 1.0) / 3).epsilon(1e-8));
  CHECK(softmax_vote(ray, std::vector<int>{}, 50).value == 0.0);
}

TEST_CASE("softmax vote stays in [0,1], approaches the max, and has the right gradient") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> ray(12);
    for (double& v : ray) v = oracle::uniform(rng, 0, 1);
    const std::vector<int> run = sfs_boundary_run(ray);
    if (run.empty()) continue;
    const double eta = oracle::uniform(rng, 1, 200);
    const SoftmaxVote v = softmax_vote(ray, run, eta);
    CHECK(v.value >= 0.0);
    CHECK(v.value <= 1.0);
    double mx = 0.0;
    for (int i : run) mx = std::max(mx, ray[static_cast<std::size_t>(i)]);
    CHECK(std::abs(softmax_vote(ray, run, 1e3).value - mx) < 1e-3);
    for (std::size_t n = 0; n < run.size(); ++n) {
      std::vector<double> rp = ray, rm = ray;
      rp[static_cast<std::size_t>(run[n])] += 1e-6;
      rm[static_cast<std::size_t>(run[n])] -= 1e-6;
      const double fd = (softmax_vote(rp, run, eta).value - softmax_vote(rm, run, eta).value) / 2e-6;
      CHECK(v.d_value[n] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("empty object casts an empty silhouette") {
  const GridSpec g = GridSpec::cube(8);
  const ForwardResult r = sfs_forward(ExtendedParameters(ParameterVector(BasisKind::ellipsoidal), {AcquisitionParams{}}), g, 0, 50, kZeroBg, true);
  CHECK(r.data.size() == 64);
  CHECK(r.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("silhouette Jacobian matches central differences where the runs are stable") {
  const GridSpec g = GridSpec::cube(12);
  const double eta = 50;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 4; ++trial) {
    const ExtendedParameters m = random_model(trial % 2 ? BasisKind::spherical : BasisKind::ellipsoidal, rng);
    const ForwardResult r = sfs_forward(m, g, 1, eta, kZeroBg, true);
    for (double v : std::vector<double>(r.data.data(), r.data.data() + r.data.size())) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const int n_pix = g.dim(0) * g.dim(1);
    const Eigen::MatrixXd analytic = r.jacobian->to_dense(n_pix, static_cast<int>(m.size()));
    const auto f = [&](const Eigen::VectorXd& x) {
      const ExtendedParameters mx = with_flat(m, x);
      const GridFieldEvaluator e(rotate_params(mx.pals, mx.acq[1], g.midpoint()), g, kZeroBg);
      oracle::Piece p{oracle::as_vector(sfs_image(e.values(), g, eta)), sigma_pieces(kZeroBg.heaviside, e.sums())};
      std::vector<double> ray(static_cast<std::size_t>(g.dim(2)));
      for (int pix = 0; pix < n_pix; ++pix) {
        for (int k = 0; k < g.dim(2); ++k) ray[static_cast<std::size_t>(k)] = e.values()[static_cast<std::size_t>(pix + n_pix * k)];
        for (int i : sfs_boundary_run(ray)) p.signature.push_back(i);
        p.signature.push_back(-1);
      }
      return p;
    };
    const oracle::CheckedFd fd = oracle::fd_jacobian_checked(f, m.flat());
    CHECK(fd.valid_count() * 2 > static_cast<int>(m.size()));
    CHECK(oracle::max_rel_err(analytic, fd) < 1e-5);
  }
}

TEST_CASE("point cloud residual examples") {
  PointCloudData cloud;
  cloud.eps_offset = 0.3;
  cloud.points = {Vec3(1, 2, 3), Vec3(2, 2, 2)};
  cloud.normals = {Vec3::UnitX(), Vec3::UnitZ()};
  const ForwardResult r = pc_residuals(ExtendedParameters(ParameterVector(BasisKind::spherical), {AcquisitionParams{}}), cloud, 0);
  Eigen::VectorXd expect(6);
  expect << 0.5 - 0.7, 0.5 - 0.7, 0.5, 0.5, -0.5, -0.5;
  CHECK((r.data - expect).norm() == 0.0);

  // A sphere whose level set passes through every point.
  const Vec3 c(2.5, 2.5, 2.5);
  const double rho = 0.8, beta = 1.0;
  const double r_sample = pseudo_norm_B(Vec3(rho, 0, 0), Mat3::Identity() * beta * beta);
  // sigma(x) = 0.7 on the linear branch at x = 0.04
  const double alpha = 0.04 / wendland_eval(WendlandOrder::psi1, r_sample);
  ParameterVector p(BasisKind::spherical);
  p.add(SphericalBasis(alpha, beta, c));
  PointCloudData sphere;
  sphere.eps_offset = 0.2;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const Vec3 n = oracle::random_vec(rng, -1, 1).normalized();
    sphere.points.push_back(c + rho * n);
    sphere.normals.push_back(n);
  }
  const ForwardResult s = pc_residuals(ExtendedParameters(p, {AcquisitionParams{}}), sphere, 0);
  CHECK(s.data.head(30).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("point cloud validation") {
  PointCloudData c;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.points = {Vec3::Zero()};
  c.normals = {Vec3(1, 1, 0)};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.normals = {Vec3::UnitX()};
  c.eps_offset = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("point cloud Jacobian matches central differences") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 4; ++trial) {
    const ExtendedParameters m = random_model(trial % 2 ? BasisKind::spherical : BasisKind::ellipsoidal, rng);
    PointCloudData cloud;
    cloud.eps_offset = 0.3;
    for (int i = 0; i < 20; ++i) {
      const Vec3 n = oracle::random_vec(rng, -1, 1).normalized();
      cloud.points.push_back(Vec3::Constant(2.5) + 0.9 * n);
      cloud.normals.push_back(n);
    }
    const Vec3 mid = Vec3::Constant(2.5);
    const ForwardResult r = pc_residuals(m, cloud, 1, kZeroBg, true, nullptr, mid);
    const Eigen::MatrixXd analytic = r.jacobian->to_dense(60, static_cast<int>(m.size()));
    const std::vector<Vec3> samples = cloud.samples();
    const auto f = [&](const Eigen::VectorXd& x) {
      const ExtendedParameters mx = with_flat(m, x);
      const PointFieldEvaluator e(rotate_params(mx.pals, mx.acq[1], mid), samples, kZeroBg);
      return oracle::Piece{oracle::as_vector(e.values()) - cloud.targets(), sigma_pieces(kZeroBg.heaviside, e.sums())};
    };
    const oracle::CheckedFd fd = oracle::fd_jacobian_checked(f, m.flat());
    CHECK(fd.valid_count() * 2 > static_cast<int>(m.size()));
    CHECK(oracle::max_rel_err(analytic, fd) < 1e-5);
  }
}

TEST_CASE("neighbor index ball queries equal brute force") {
  std::mt19937_64 rng(7);
  std::vector<Vec3> pts;
  for (int i = 0; i < 800; ++i) pts.push_back(oracle::random_vec(rng, -2, 3));
  for (double cell : {0.0, 0.1, 0.7}) {
    const NeighborIndex idx(pts, cell);
    for (int q = 0; q < 60; ++q) {
      const Vec3 c = oracle::random_vec(rng, -3, 4);
      const double radius = oracle::uniform(rng, 0.0, 1.5);
      std::vector<int> got = idx.query_ball(c, radius);
      std::sort(got.begin(), got.end());
      std::vector<int> want;
      for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        if ((pts[static_cast<std::size_t>(i)] - c).squaredNorm() <= radius * radius) want.push_back(i);
      }
      CHECK(got == want);
    }
  }
}

TEST_CASE("neighbor index over coincident points") {
  // a degenerate bounding box makes the cells tiny; queries must still clamp
  const std::vector<Vec3> one{Vec3(2.5, 2.5, 2.5)};
  const NeighborIndex idx(one);
  CHECK(idx.query_ball(Vec3(2.5, 2.5, 2.5), 1.0) == std::vector<int>{0});
  CHECK(idx.query_ball(Vec3(3.0, 2.5, 2.5), 1.0) == std::vector<int>{0});
  CHECK(idx.query_ball(Vec3(4.0, 2.5, 2.5), 1.0).empty());
  const std::vector<Vec3> same(5, Vec3(1, 1, 1));
  CHECK(NeighborIndex(same).query_ball(Vec3(1.2, 0.9, 1.0), 0.5).size() == 5);
}
