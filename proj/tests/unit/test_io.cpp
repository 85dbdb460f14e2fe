#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pals/core/errors.hpp"
#include "pals/core/field.hpp"
#include "pals/io/formats.hpp"
#include "pals/io/gradcheck.hpp"
#include "pals/io/metrics.hpp"
#include "pals/io/phantom.hpp"
#include "pals/io/simulate.hpp"
#include "pals/solver/reconstruct.hpp"
#include "support/oracles.hpp"

using namespace pals;

TEST_CASE("voxelize and downsample examples") {
  const GridSpec g = GridSpec::cube(8);
  const Phantom full("full", {}, {BoxPrimitive{Vec3::Constant(2.5), Vec3::Constant(2.5)}});
  for (double v : voxelize(full, g).values()) CHECK(v == 1.0);
  const ScalarField half = downsample(ScalarField::constant(g, 0.25), 2);
  CHECK(half.grid().dims() == std::array<int, 3>{4, 4, 4});
  for (double v : half.values()) CHECK(v == 0.25);
  CHECK_THROWS_AS(downsample(ScalarField::constant(g, 1.0), 3), ConfigError);
}

TEST_CASE("voxelized sphere volume is within 3% of the analytic volume") {
  const GridSpec g = GridSpec::cube(64);
  const double r = 1.3;
  const Phantom s("s", {EllipsoidPrimitive{g.midpoint(), Vec3::Constant(r)}});
  const double vol = voxelize(s, g).sum() * g.voxel_volume();
  const double exact = 4.0 / 3.0 * std::numbers::pi * r * r * r;
  CHECK(std::abs(vol - exact) / exact < 0.03);
  CHECK(s.volume() == doctest::Approx(exact));
}

TEST_CASE("named phantoms fit the domain") {
  const GridSpec g = GridSpec::cube(32);
  for (const char* name : {"sphere", "ellipsoid", "nonconvex"}) {
    const ScalarField f = voxelize(Phantom::named(name, g), g);
    CHECK(f.sum() > 100);
    // nothing on the boundary layer
    double edge = 0.0;
    for (int j = 0; j < 32; ++j) {
      for (int k = 0; k < 32; ++k) edge += f.at(0, j, k) + f.at(31, j, k);
    }
    CHECK(edge == 0.0);
  }
  // the cube fills the whole domain
  const ScalarField cube = voxelize(Phantom::named("cube", g), g);
  CHECK(cube.sum() == static_cast<double>(g.voxel_count()));
  CHECK_THROWS_AS(Phantom::named("teapot", g), ConfigError);
}

TEST_CASE("simulation without noise records the true poses and is reproducible") {
  const GridSpec hi = GridSpec::cube(32), lo = GridSpec::cube(16);
  SimulationOptions so;
  so.n_experiments = 5;
  NoiseSpec none;
  none.data_sigma_voxels = 0.0;
  none.seed = 4;
  const Phantom ph = Phantom::named("nonconvex", hi);
  for (SimModality mod : {SimModality::dip, SimModality::silhouette, SimModality::point_cloud}) {
    so.modality = mod;
    so.n_points = 50;
    const SimulationResult a = simulate(ph, hi, lo, so, none);
    const SimulationResult b = simulate(ph, hi, lo, so, none);
    REQUIRE(a.truth.size() == 5);
    for (std::size_t e = 0; e < 5; ++e) {
      CHECK(a.truth[e] == a.recorded[e]);
      CHECK(a.truth[e] == b.truth[e]);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(a.truth[e].b[k]) <= so.translation_box);
    }
    if (mod == SimModality::dip) {
      for (std::size_t e = 0; e < 5; ++e) CHECK(a.dips[e].observed == b.dips[e].observed);
    }
    if (mod == SimModality::silhouette) {
      for (std::size_t e = 0; e < 5; ++e) CHECK(a.silhouettes[e].observed == b.silhouettes[e].observed);
    }
  }
}

TEST_CASE("calibration noise perturbs only the recorded poses") {
  const GridSpec hi = GridSpec::cube(16), lo = GridSpec::cube(8);
  SimulationOptions so;
  so.n_experiments = 2000;
  so.modality = SimModality::point_cloud;
  so.n_points = 1;
  NoiseSpec n;
  n.angle_sigma_deg = 4.0;
  n.trans_frac = 0.04;
  n.seed = 2;
  const SimulationResult r = simulate(Phantom::named("sphere", hi), hi, lo, so, n);
  double sum_t = 0.0, sum_b = 0.0;
  for (std::size_t e = 0; e < r.truth.size(); ++e) {
    const double dt = r.recorded[e].theta - r.truth[e].theta;
    const double db = r.recorded[e].b[0] - r.truth[e].b[0];
    sum_t += dt * dt;
    sum_b += db * db;
  }
  const double sd_t = std::sqrt(sum_t / 2000) * 180 / std::numbers::pi;
  const double sd_b = std::sqrt(sum_b / 2000);
  CHECK(sd_t == doctest::Approx(4.0).epsilon(0.06));
  CHECK(sd_b == doctest::Approx(0.04 * 5.0).epsilon(0.06));
}

TEST_CASE("trace noise has standard deviation 2V") {
  // Brute-force clean traces from the true poses, compared with the noisy ones.
  const GridSpec hi = GridSpec::cube(32), lo = GridSpec::cube(16);
  const Phantom ph("big", {EllipsoidPrimitive{hi.midpoint(), Vec3(1.9, 1.9, 1.9)}});
  SimulationOptions so;
  so.n_experiments = 1000;
  NoiseSpec n;
  n.seed = 6;
  const SimulationResult r = simulate(ph, hi, lo, so, n);
  const double sigma = 2.0 * lo.voxel_volume();
  double sum = 0.0, sum2 = 0.0;
  int count = 0;
  for (std::size_t e = 0; e < r.dips.size(); ++e) {
    const RigidTransform t(r.truth[e], lo.midpoint());
    const ScalarField v = voxelize(ph, hi, [&](const Vec3& x) { return t.inverse(x); });
    std::vector<double> clean(16, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) clean[static_cast<std::size_t>(hi.unravel(i)[2] / 2)] += v[i] * hi.voxel_volume();
    for (int k = 0; k < 16; ++k) {
      // skip slices where clamping at zero could bite
      if (clean[static_cast<std::size_t>(k)] < 6 * sigma) continue;
      const double d = r.dips[e].observed[static_cast<std::size_t>(k)] - clean[static_cast<std::size_t>(k)];
      sum += d;
      sum2 += d * d;
      ++count;
    }
  }
  REQUIRE(count >= 10000);
  const double mean = sum / count;
  const double sd = std::sqrt(sum2 / count - mean * mean);
  CHECK(sd == doctest::Approx(sigma).epsilon(0.05));
  CHECK(std::abs(mean) < 0.05 * sigma);
}

TEST_CASE("sampled surface points lie on the analytic surface") {
  const GridSpec hi = GridSpec::cube(64), lo = GridSpec::cube(32);
  SimulationOptions so;
  so.modality = SimModality::point_cloud;
  so.n_experiments = 2;
  so.n_points = 300;
  NoiseSpec n;
  n.seed = 3;
  const double diag = hi.spacing().norm();
  for (const char* name : {"sphere", "ellipsoid", "nonconvex"}) {
    const Phantom ph = Phantom::named(name, hi);
    const SimulationResult r = simulate(ph, hi, lo, so, n);
    for (std::size_t e = 0; e < 2; ++e) {
      const RigidTransform t(r.truth[e], lo.midpoint());
      for (std::size_t i = 0; i < r.clouds[e].size(); ++i) {
        const Vec3 p = t.inverse(r.clouds[e].points[i]);
        CHECK(std::abs(ph.signed_distance(p)) < diag);
        CHECK(r.clouds[e].normals[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
        // the normal points outward
        const Vec3 n_obj = t.rotation().transpose() * r.clouds[e].normals[i];
        CHECK(ph.signed_distance(p + 0.05 * n_obj) > ph.signed_distance(p - 0.05 * n_obj));
      }
    }
  }
}

TEST_CASE("metrics") {
  const GridSpec g = GridSpec::cube(8);
  std::vector<double> v(g.voxel_count(), 0.0);
  for (std::size_t i = 0; i < 100; ++i) v[i] = 1.0;
  const ScalarField a(g, v);
  const ScalarField empty = ScalarField::constant(g, 0.0);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, empty) == 0.0);
  CHECK(iou(empty, empty) == 1.0);
  std::vector<double> w = v;
  for (std::size_t i = 50; i < 150; ++i) w[i] = 1.0;
  const ScalarField b(g, w);
  CHECK(iou(a, b) == doctest::Approx(100.0 / 150.0));
  CHECK(volume_rel_err(b, a) == doctest::Approx(0.5));
}

TEST_CASE("voxel grid files round-trip") {
  const auto dir = oracle::temp_dir("voxels");
  const GridSpec g({3, 4, 5}, Vec3(0.5, -1, 2), Vec3(3, 2, 1));
  std::mt19937_64 rng(1);
  std::vector<double> v(g.voxel_count());
  for (double& x : v) x = static_cast<float>(oracle::uniform(rng, 0, 1));
  write_voxel_grid(dir / "soft", ScalarField(g, v), VoxelDtype::f32);
  const ScalarField back = read_voxel_grid(dir / "soft.json");
  CHECK(back.grid() == g);
  CHECK(back.values() == v);
  CHECK(read_voxel_grid(dir / "soft.raw").values() == v);

  const ScalarField bin = binarize(ScalarField(g, v), 0.5);
  write_voxel_grid(dir / "bin", bin, VoxelDtype::u8);
  CHECK(read_voxel_grid(dir / "bin").values() == bin.values());
  CHECK(std::filesystem::file_size(dir / "bin.raw") == g.voxel_count());
  CHECK_THROWS(read_voxel_grid(dir / "missing"));
}

TEST_CASE("dip, silhouette and point cloud files round-trip") {
  const auto dir = oracle::temp_dir("formats");
  const GridSpec hi = GridSpec::cube(16), lo = GridSpec::cube(8);
  SimulationOptions so;
  so.n_experiments = 3;
  so.n_points = 25;
  NoiseSpec n;
  n.seed = 9;
  n.angle_sigma_deg = 2.0;
  const Phantom ph = Phantom::named("ellipsoid", hi);

  const SimulationResult dips = simulate(ph, hi, lo, so, n);
  write_dip_csv(dir / "d.csv", dips.dips);
  const auto dback = read_dip_csv(dir / "d.csv");
  REQUIRE(dback.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(dback[e].observed == dips.dips[e].observed);
    CHECK(dback[e].acq.b == dips.dips[e].acq.b);
    // angles are stored in degrees
    CHECK(dback[e].acq.theta == doctest::Approx(dips.dips[e].acq.theta).epsilon(1e-15));
    CHECK(dback[e].acq.phi == doctest::Approx(dips.dips[e].acq.phi).epsilon(1e-15));
  }

  so.modality = SimModality::silhouette;
  const SimulationResult sil = simulate(ph, hi, lo, so, n);
  write_silhouettes(dir / "s.json", sil.silhouettes, 8, 8);
  int n1 = 0, n2 = 0;
  const auto sback = read_silhouettes(dir / "s.json", &n1, &n2);
  CHECK(n1 == 8);
  CHECK(n2 == 8);
  REQUIRE(sback.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(sback[e].eta == sil.silhouettes[e].eta);
    for (std::size_t i = 0; i < sback[e].observed.size(); ++i) {
      // 8-bit PGM quantization
      CHECK(std::abs(sback[e].observed[i] - sil.silhouettes[e].observed[i]) <= 0.5 / 255 + 1e-12);
    }
  }

  so.modality = SimModality::point_cloud;
  const SimulationResult pc = simulate(ph, hi, lo, so, n);
  write_point_cloud(dir / "c.txt", pc.clouds[0], pc.recorded[0]);
  const PointCloudFile cback = read_point_cloud(dir / "c.txt");
  CHECK(cback.cloud.points == pc.clouds[0].points);
  CHECK(cback.cloud.normals == pc.clouds[0].normals);
  CHECK(cback.cloud.eps_offset == pc.clouds[0].eps_offset);
  CHECK(cback.cloud.level == pc.clouds[0].level);
  CHECK(cback.pose == pc.recorded[0]);
}

TEST_CASE("parameter files round-trip bit-exactly") {
  const auto dir = oracle::temp_dir("params");
  std::mt19937_64 rng(4);
  for (BasisKind kind : {BasisKind::spherical, BasisKind::ellipsoidal, BasisKind::cholesky}) {
    ExtendedParameters m(initial_parameters(kind, GridSpec::cube(8), RBFSchedule{}, 4, 3e-4),
                         {AcquisitionParams{0.1, -0.2, Vec3(1e-3, 2, std::numbers::pi)}});
    const FieldOptions fo{HeavisideConfig::zero_background(0.2, 0.03), WendlandOrder::psi2};
    write_params(dir / "p.json", m, &fo);
    const ExtendedParameters back = read_params(dir / "p.json");
    CHECK(back.pals == m.pals);
    CHECK(back.acq[0] == m.acq[0]);
    const auto fback = field_options_from_json(read_file(dir / "p.json"));
    REQUIRE(fback.has_value());
    CHECK(fback->heaviside.offset == fo.heaviside.offset);
    CHECK(fback->order == WendlandOrder::psi2);
  }
  CHECK_FALSE(field_options_from_json(params_to_json(ExtendedParameters(ParameterVector(BasisKind::spherical)))).has_value());
  CHECK_THROWS(params_from_json("{\"kind\": \"blob\", \"params\": []}"));
}

TEST_CASE("trace csv and svg") {
  OptimizationTrace t;
  t.records.push_back({0, 0, 2.0, 0.0, 2.0, 2.0, 20, 0.0, 1e-3, {}});
  t.records.push_back({1, 1, 0.5, 0.01, 2.0, 0.51, 25, 1.0, 1e-3, {}});
  const std::string csv = trace_to_csv(t);
  CHECK(csv.rfind("iter,misfit,reg,n_rbf,step\n", 0) == 0);
  CHECK(csv.find("\n1,0.5,0.01,25,1\n") != std::string::npos);
  const std::string svg = trace_to_svg(t);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("atomic write leaves no temporary behind") {
  const auto dir = oracle::temp_dir("atomic");
  atomic_write(dir / "a.txt", "hello");
  atomic_write(dir / "a.txt", "world");
  CHECK(read_file(dir / "a.txt") == "world");
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}

TEST_CASE("gradcheck oracle passes every family and rejects unknown names") {
  const GradcheckReport r = gradcheck("all", 5, 0.0, 1);
  CHECK(r.families.size() == gradcheck_families().size());
  for (const auto& f : r.families) {
    INFO(f.family << " max rel err " << f.max_rel_err);
    CHECK(f.passed);
  }
  CHECK(r.passed());
  CHECK_THROWS_AS(gradcheck("curl", 1), ConfigError);
  CHECK(gradcheck_default_tolerance("rot-acq") == 1e-7);
  CHECK(gradcheck_default_tolerance("barrier") == 1e-6);
  CHECK(gradcheck_default_tolerance("dip") == 1e-5);
}
