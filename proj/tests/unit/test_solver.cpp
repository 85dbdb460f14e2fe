#include <doctest.h>

#include <random>

#include "pals/core/errors.hpp"
#include "pals/core/field.hpp"
#include "pals/io/phantom.hpp"
#include "pals/io/simulate.hpp"
#include "pals/solver/gauss_newton.hpp"
#include "pals/solver/joint.hpp"
#include "pals/solver/rbf_insertion.hpp"
#include "pals/solver/reconstruct.hpp"
#include "pals/solver/regularizers.hpp"
#include "pals/solver/terms.hpp"
#include "support/oracles.hpp"

using namespace pals;

namespace {

// r = A x - y over the PaLS block; exercises the solver without a forward model.
class LinearTerm final : public ObjectiveTerm {
 public:
  LinearTerm(Eigen::MatrixXd a, Eigen::VectorXd y) : ObjectiveTerm(0, {}, 1.0), a_(std::move(a)), y_(std::move(y)) {}
  Modality modality() const override { return Modality::dip; }
  Eigen::Index residual_size() const override { return y_.size(); }
  const GridSpec* grid() const override { return nullptr; }
  TermEvaluation evaluate(const ExtendedParameters& m, bool want_jacobian) const override {
    TermEvaluation out{a_ * m.pals.flat() - y_, std::nullopt};
    if (want_jacobian) {
      BlockJacobian j;
      for (int r = 0; r < a_.rows(); ++r) j.rows.push_back(r);
      for (int c = 0; c < a_.cols(); ++c) j.cols.push_back(c);
      j.block = a_;
      out.jacobian = std::move(j);
    }
    return out;
  }
  void deposit_misfit_gradient(const ExtendedParameters&, const Eigen::VectorXd&, const GridSpec&,
                               std::span<double>) const override {}

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd y_;
};

struct DipProblem {
  GridSpec grid = GridSpec::cube(16);
  FieldOptions options{HeavisideConfig::zero_background(), WendlandOrder::psi1};
  SimulationResult sim;
  std::vector<TermPtr> terms;
};

DipProblem dip_problem(int n_dips, double angle_noise_deg = 0.0) {
  DipProblem p;
  const GridSpec hi = GridSpec::cube(32);
  SimulationOptions so;
  so.n_experiments = n_dips;
  NoiseSpec noise;
  noise.seed = 17;
  noise.angle_sigma_deg = angle_noise_deg;
  p.sim = simulate(Phantom::named("ellipsoid", hi), hi, p.grid, so, noise);
  for (int e = 0; e < n_dips; ++e) {
    p.terms.push_back(std::make_shared<DipTerm>(p.grid, p.sim.dips[static_cast<std::size_t>(e)], e, p.options));
  }
  return p;
}

ReconstructOptions small_schedule() {
  ReconstructOptions o;
  o.schedule.p0 = 10;
  o.schedule.p = 3;
  o.schedule.outer_iters = 3;
  o.gn.it_gn = 2;
  o.seed = 5;
  return o;
}

}  // namespace

TEST_CASE("iterated tikhonov examples") {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(5, -1, 1);
  const Penalty at = iterated_tikhonov(a, a, 0.3);
  CHECK(at.value == 0.0);
  CHECK(at.gradient.norm() == 0.0);
  const Eigen::VectorXd m = a + Eigen::VectorXd::Constant(5, 0.5);
  const Penalty p = iterated_tikhonov(m, a, 0.3);
  CHECK(p.value == doctest::Approx(0.3 * 5 * 0.25));
  CHECK((p.gradient - 2 * 0.3 * (m - a)).norm() < 1e-15);
  CHECK((p.hessian - 0.6 * Eigen::MatrixXd::Identity(5, 5)).norm() == 0.0);
  const Penalty zero = iterated_tikhonov(m, a, 0.0);
  CHECK(zero.value == 0.0);
  CHECK(zero.gradient.norm() == 0.0);
  CHECK(zero.hessian.norm() == 0.0);
  CHECK_THROWS_AS(iterated_tikhonov(m, Eigen::VectorXd::Zero(4), 1.0), ContractError);
}

TEST_CASE("log-det barrier examples and derivatives") {
  ParameterVector id(BasisKind::ellipsoidal);
  id.add(EllipsoidBasis(0.5, Mat3(Mat3::Identity()), Vec3::Zero()));
  id.add(EllipsoidBasis(0.5, Mat3(Mat3::Identity()), Vec3::Ones()));
  CHECK(logdet_barrier(id, 1.0).value == 0.0);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    ParameterVector m(BasisKind::ellipsoidal);
    for (int i = 0; i < 3; ++i) m.add(EllipsoidBasis(0.5, oracle::random_spd(rng, 0.5, 1.5), oracle::random_vec(rng, 0, 5)));
    const Penalty p = logdet_barrier(m, 1.0);
    const auto value = [&](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, logdet_barrier_value(ParameterVector::from_flat(BasisKind::ellipsoidal, {x.data(), static_cast<std::size_t>(x.size())}), 1.0));
    };
    const auto grad = [&](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(logdet_barrier(ParameterVector::from_flat(BasisKind::ellipsoidal, {x.data(), static_cast<std::size_t>(x.size())}), 1.0).gradient);
    };
    CHECK(oracle::max_rel_err(p.gradient.transpose(), oracle::fd_jacobian(value, m.flat())) < 1e-6);
    CHECK(oracle::max_rel_err(p.hessian, oracle::fd_jacobian(grad, m.flat())) < 1e-6);
  }

  double last = 0.0;
  for (double d : {1e-1, 1e-4, 1e-8, 1e-12}) {
    ParameterVector thin(BasisKind::ellipsoidal);
    thin.add(EllipsoidBasis(0.5, Mat3(Vec3(1, 1, d).asDiagonal()), Vec3::Zero()));
    const double v = logdet_barrier_value(thin, 1.0);
    CHECK(v > last);
    last = v;
  }
  ParameterVector flat(BasisKind::ellipsoidal);
  flat.add(EllipsoidBasis(0.5, Mat3(Vec3(1, 1, -1).asDiagonal()), Vec3::Zero()));
  CHECK_THROWS_AS(logdet_barrier(flat, 1.0), BarrierViolation);
}

TEST_CASE("gauss-newton solves a linear least-squares problem in one full step") {
  std::mt19937_64 rng(2);
  ParameterVector p(BasisKind::spherical);
  p.add(SphericalBasis(0.1, 1.0, Vec3(1, 2, 3)));
  p.add(SphericalBasis(0.2, 2.0, Vec3(2, 2, 2)));
  const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(20, 10, [&] { return oracle::uniform(rng, -1, 1); });
  const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(20, [&] { return oracle::uniform(rng, -1, 1); });
  const std::vector<TermPtr> terms{std::make_shared<LinearTerm>(a, y)};
  const ExtendedParameters m(p);
  Regularization reg;
  reg.anchor = m.flat();
  reg.lambda = 1e-14;
  const StepResult s = gauss_newton_step(m, terms, reg, GNConfig{}, false);
  CHECK(s.record.mu == 1.0);
  CHECK(s.record.objective_after < s.record.objective_before);
  const Eigen::VectorXd ls = a.colPivHouseholderQr().solve(y);
  CHECK((s.params.pals.flat() - ls).norm() < 1e-8);

  Regularization heavy;
  heavy.anchor = m.flat();
  heavy.lambda = 1e12;
  const StepResult tiny = gauss_newton_step(m, terms, heavy, GNConfig{}, false);
  CHECK((tiny.params.flat() - m.flat()).norm() < 1e-10);
}

TEST_CASE("gauss-newton steps never increase the regularized objective") {
  DipProblem prob = dip_problem(4);
  ExtendedParameters m(initial_parameters(BasisKind::ellipsoidal, prob.grid, RBFSchedule{}, 3));
  for (const auto& t : prob.terms) m.acq.push_back(t->recorded_acq());
  Regularization reg;
  reg.anchor = m.flat();
  for (int it = 0; it < 4; ++it) {
    const StepResult s = gauss_newton_step(m, prob.terms, reg, GNConfig{}, false);
    CHECK(s.record.objective_after <= s.record.objective_before);
    const ObjectiveValue v = objective_value(s.params, prob.terms, reg, false);
    CHECK(v.total() == doctest::Approx(s.record.objective_after).epsilon(1e-12));
    m = s.params;
  }
}

TEST_CASE("add_rbfs picks separated high-score voxels with zero weight") {
  const GridSpec g = GridSpec::cube(12);
  std::mt19937_64 rng(3);
  std::vector<double> slopes(g.voxel_count()), grad(g.voxel_count());
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    slopes[i] = oracle::uniform(rng, 0, 1);
    grad[i] = oracle::uniform(rng, -1, 1);
  }
  RBFSchedule s;
  s.p = 6;
  ParameterVector m0(BasisKind::ellipsoidal);
  m0.add(EllipsoidBasis(0.4, Mat3(Mat3::Identity()), Vec3::Constant(2.5)));
  const InsertionResult r = add_rbfs(m0, slopes, grad, s, g);
  REQUIRE(r.params.size() == 7);
  REQUIRE(r.centers.size() == 6);
  std::size_t best = 0;
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (std::abs(slopes[i] * grad[i]) > std::abs(slopes[best] * grad[best])) best = i;
  }
  CHECK(g.index(r.centers[0][0], r.centers[0][1], r.centers[0][2]) == best);
  for (std::size_t a = 0; a < r.centers.size(); ++a) {
    CHECK(r.params.alpha(static_cast<int>(a) + 1) == 0.0);
    CHECK((r.params.form_matrix(static_cast<int>(a) + 1) - 9.0 * Mat3::Identity()).norm() < 1e-12);
    for (std::size_t b = a + 1; b < r.centers.size(); ++b) {
      int cheb = 0;
      for (int k = 0; k < 3; ++k) cheb = std::max(cheb, std::abs(r.centers[a][static_cast<std::size_t>(k)] - r.centers[b][static_cast<std::size_t>(k)]));
      CHECK(cheb >= 2);
    }
  }
  const ScalarField before = field_eval(m0, g).field;
  const ScalarField after = field_eval(r.params, g).field;
  CHECK(before.values() == after.values());
  // avoid list is honored
  const InsertionResult again = add_rbfs(m0, slopes, grad, s, g, r.centers);
  for (const auto& c : again.centers) {
    for (const auto& prev : r.centers) {
      int cheb = 0;
      for (int k = 0; k < 3; ++k) cheb = std::max(cheb, std::abs(c[static_cast<std::size_t>(k)] - prev[static_cast<std::size_t>(k)]));
      CHECK(cheb >= 2);
    }
  }
}

TEST_CASE("zero-weight insertion leaves every residual bit-identical") {
  DipProblem prob = dip_problem(3);
  ExtendedParameters m(initial_parameters(BasisKind::ellipsoidal, prob.grid, RBFSchedule{}, 9));
  for (const auto& t : prob.terms) m.acq.push_back(t->recorded_acq());
  std::vector<double> slopes(prob.grid.voxel_count(), 1.0), grad(prob.grid.voxel_count());
  std::mt19937_64 rng(4);
  for (double& v : grad) v = oracle::uniform(rng, -1, 1);
  ExtendedParameters grown = m;
  grown.pals = add_rbfs(m.pals, slopes, grad, RBFSchedule{}, prob.grid).params;
  REQUIRE(grown.pals.size() == m.pals.size() + 5);
  const auto a = evaluate_terms(m, prob.terms, false);
  const auto b = evaluate_terms(grown, prob.terms, false);
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t].residual == b[t].residual);
}

TEST_CASE("joint objective weights") {
  DipProblem prob = dip_problem(4);
  CHECK_THROWS_AS(joint_objective({}, GammaMode::fixed(1.0)), ConfigError);

  std::vector<std::vector<TermPtr>> single{prob.terms};
  const auto one = joint_objective(single, GammaMode::fixed(7.0));
  for (const auto& t : one) CHECK(t->weight() == 1.0);

  ExtendedParameters m0(initial_parameters(BasisKind::ellipsoidal, prob.grid, RBFSchedule{}, 1));
  for (const auto& t : prob.terms) m0.acq.push_back(t->recorded_acq());
  std::vector<std::vector<TermPtr>> split{{prob.terms[0], prob.terms[1], prob.terms[2]}, {prob.terms[3]}};
  const auto fixed = joint_objective(split, GammaMode::fixed(0.25), &m0);
  CHECK(fixed[3]->weight() == 0.25);
  const auto joint = joint_objective(split, GammaMode::automatic(), &m0);
  const auto evals = evaluate_terms(m0, joint, false);
  double f0 = 0.0, f1 = 0.0;
  for (std::size_t t = 0; t < 3; ++t) f0 += joint[t]->misfit(evals[t].residual);
  f1 = joint[3]->misfit(evals[3].residual);
  CHECK(f0 == doctest::Approx(f1).epsilon(1e-9));
}

TEST_CASE("reconstruct contracts on a small dip problem") {
  DipProblem prob = dip_problem(6);
  ReconstructOptions o = small_schedule();
  const ReconstructionResult r = reconstruct(prob.terms, prob.grid, o);
  REQUIRE(r.trace.rbf_counts.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(r.trace.rbf_counts[static_cast<std::size_t>(k)] == 10 + (k + 1) * 3);
  for (const TraceRecord& rec : r.trace.records) {
    if (rec.iter > 0) CHECK(rec.objective <= rec.objective_before);
  }
  CHECK(r.trace.final_misfit() < r.trace.initial_misfit());
  // calibration off: acquisition parameters untouched
  for (std::size_t e = 0; e < prob.terms.size(); ++e) CHECK(r.params.acq[e] == prob.terms[e]->recorded_acq());
  for (double v : r.binary.values()) CHECK((v == 0.0 || v == 1.0));

  const ReconstructionResult again = reconstruct(prob.terms, prob.grid, o);
  CHECK(again.params.flat() == r.params.flat());
  REQUIRE(again.trace.records.size() == r.trace.records.size());
  for (std::size_t i = 0; i < r.trace.records.size(); ++i) CHECK(again.trace.records[i].objective == r.trace.records[i].objective);
}

TEST_CASE("calibration estimation moves the acquisition parameters") {
  DipProblem prob = dip_problem(6, 3.0);
  ReconstructOptions o = small_schedule();
  o.estimate_calibration = true;
  o.calibration_start = 2;
  const ReconstructionResult r = reconstruct(prob.terms, prob.grid, o);
  bool moved = false;
  for (std::size_t e = 0; e < prob.terms.size(); ++e) moved = moved || !(r.params.acq[e] == prob.terms[e]->recorded_acq());
  CHECK(moved);
  for (const TraceRecord& rec : r.trace.records) {
    if (rec.iter > 0) CHECK(rec.objective <= rec.objective_before);
  }
}

TEST_CASE("reconstruct option validation") {
  DipProblem prob = dip_problem(2);
  ReconstructOptions o = small_schedule();
  o.term_start = {1};
  CHECK_THROWS_AS(reconstruct(prob.terms, prob.grid, o), ConfigError);
  o.term_start.clear();
  o.calibration_start = 0;
  CHECK_THROWS_AS(reconstruct(prob.terms, prob.grid, o), ConfigError);
  GNConfig bad;
  bad.armijo_shrink = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RBFSchedule s;
  s.p0 = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}
