#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/errors.hpp"
#include "maxent/experiments.hpp"
#include "maxent/random.hpp"

using namespace maxent;
using testing::pt;

namespace {

double exp_error(double dt) {
  const Integration r = integrate([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; }, pt({1.0}),
                                  0.0, 1.0, dt);
  return std::abs(r.trajectory.states(r.trajectory.samples() - 1, 0) - std::exp(-1.0));
}

Eigen::VectorXd endpoint(const VectorField& f, const Point& x0, double t1, double dt) {
  const Integration r = integrate(f, x0, 0.0, t1, dt);
  return r.trajectory.states.bottomRows<1>().transpose();
}

// Samples of an affine field x' = A x + b on a grid inside the unit square.
Dataset affine_data(const Eigen::Matrix2d& a, const Eigen::Vector2d& b, int per_axis) {
  const NodeSet g = testing::grid({{0.05, 0.95}, {0.05, 0.95}}, per_axis);
  Dataset d;
  d.points = g.coords();
  d.values = ((a * d.points).colwise() + b).transpose();
  return d;
}

}  // namespace

TEST_CASE("RK4 on x' = -x") {
  CHECK(exp_error(0.01) <= 1e-8);
  const Integration r = integrate([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; }, pt({1.0}),
                                  0.0, 1.0, 0.01);
  CHECK(r.completed());
  CHECK(r.trajectory.samples() == 101);
  CHECK(r.trajectory.times(100) == 1.0);
}

TEST_CASE("RK4 observed order") {
  const double e1 = exp_error(0.04), e2 = exp_error(0.02), e3 = exp_error(0.01);
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  MESSAGE("observed orders " << p1 << ", " << p2);
  CHECK(p1 >= 3.7);
  CHECK(p1 <= 4.3);
  CHECK(p2 >= 3.7);
  CHECK(p2 <= 4.3);
}

TEST_CASE("final step is shortened to land on t1") {
  const Integration r = integrate([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 0.0 * x; },
                                  pt({2.0, -1.0}), 0.0, 1.005, 0.01);
  CHECK(r.trajectory.times(r.trajectory.samples() - 1) == 1.005);
  CHECK(r.trajectory.samples() == 102);
  for (Eigen::Index k = 1; k < r.trajectory.samples(); ++k) {
    CHECK(r.trajectory.times(k) > r.trajectory.times(k - 1));
    CHECK(r.trajectory.states.row(k) == Eigen::RowVector2d(2.0, -1.0));
  }
}

TEST_CASE("integration errors and outcomes") {
  const VectorField zero = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 0.0 * x; };
  CHECK_THROWS_AS(integrate(zero, pt({1.0}), 0.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(integrate(zero, pt({1.0}), 0.0, 1.0, -0.1), ConfigError);
  CHECK_THROWS_AS(integrate(zero, pt({1.0}), 1.0, 1.0, 0.1), ConfigError);

  // x' = x^2 from 1 blows up at t = 1.
  const Integration blow = integrate([](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.array().square(); },
                                     pt({1.0}), 0.0, 2.0, 0.01);
  CHECK(blow.status == IntegrationStatus::NumericalBlowup);
  CHECK(blow.last_time > 0.9);
  CHECK(blow.last_time < 1.1);
  CHECK(blow.trajectory.states.allFinite());

  // A field defined only for x <= 1.55; the stage points of the step from t = 1.5 cross it.
  const VectorField bounded = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    if (x(0) > 1.55) throw OutsideHullError("left");
    return Eigen::VectorXd::Ones(1);
  };
  const Integration exit = integrate(bounded, pt({0.0}), 0.0, 3.0, 0.1);
  CHECK(exit.status == IntegrationStatus::DomainExit);
  CHECK(exit.last_time == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(exit.trajectory.times(exit.trajectory.samples() - 1) == exit.last_time);
}

TEST_CASE("truth trajectories converge at fourth order") {
  const VectorField lorenz = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lorenz_field(x.head<3>(), 10.0, 28.0, 8.0 / 3.0);
  };
  // Short horizon: by t = 1 the components of the leading error term cancel
  // and the ratio swings between 12 and 38 before settling.
  const Point x0 = pt({1.0, 1.0, 1.0});
  const Eigen::VectorXd a = endpoint(lorenz, x0, 0.5, 0.005);
  const Eigen::VectorXd b = endpoint(lorenz, x0, 0.5, 0.0025);
  const Eigen::VectorXd c = endpoint(lorenz, x0, 0.5, 0.00125);
  const double ratio = (a - b).norm() / (b - c).norm();
  MESSAGE("Lorenz self-convergence ratio " << ratio);
  CHECK(ratio >= 15.0);
  CHECK(ratio <= 17.0);

  const double h0 = std::sqrt(1.1 * 1.2);
  const VectorField orbit = [h0](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return orbit_field(x.head<4>(), 1.0, 0.2, h0);
  };
  const Point s0 = pt({1.1, 0.0, 0.0, h0 / (1.1 * 1.1)});
  const Eigen::VectorXd oa = endpoint(orbit, s0, 10.0, 0.04);
  const Eigen::VectorXd ob = endpoint(orbit, s0, 10.0, 0.02);
  const Eigen::VectorXd oc = endpoint(orbit, s0, 10.0, 0.01);
  const double oratio = (oa - ob).norm() / (ob - oc).norm();
  MESSAGE("orbit self-convergence ratio " << oratio);
  CHECK(oratio >= 15.0);
  CHECK(oratio <= 17.0);
}

TEST_CASE("trajectory_rms and max_deviation") {
  Trajectory a;
  a.times = Eigen::VectorXd::LinSpaced(11, 0.0, 1.0);
  a.states = Eigen::MatrixXd::Random(11, 3);
  CHECK(trajectory_rms(a, a) == 0.0);
  Trajectory b = a;
  b.states.col(1).array() += 0.6;
  CHECK(trajectory_rms(a, b) == doctest::Approx(0.6 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(max_deviation(a, b, 0.5) == doctest::Approx(0.6).epsilon(1e-12));

  Trajectory shifted = a;
  shifted.times.array() += 0.01;
  CHECK_THROWS_AS(trajectory_rms(a, shifted), DomainError);
  Trajectory shorter{a.times.head(5), a.states.topRows(5)};
  CHECK_THROWS_AS(trajectory_rms(a, shorter), DomainError);
}

TEST_CASE("angular momentum error") {
  ExperimentConfig c = default_experiment_config("orbit");
  const DynamicsProblem p = gen_orbit(c);
  const Eigen::VectorXd e = angular_momentum_error(p.truth, p.angular_momentum);
  CHECK(e.maxCoeff() <= 1e-8);

  Trajectory scaled = p.truth;
  scaled.states.col(3) *= 1.0 + 1e-3;
  const Eigen::VectorXd es = angular_momentum_error(scaled, p.angular_momentum);
  CHECK(es.maxCoeff() == doctest::Approx(1e-3).epsilon(1e-4));

  Trajectory bad = p.truth;
  bad.states(5, 0) = 0.0;
  CHECK_THROWS_AS(angular_momentum_error(bad, p.angular_momentum), DomainError);
  CHECK_THROWS_AS(angular_momentum_error(p.truth, 0.0), DomainError);
}

TEST_CASE("affine fields are reproduced exactly") {
  Eigen::Matrix2d a;
  a << -0.5, 2.0, -1.0, 0.3;
  const Eigen::Vector2d b(0.7, -0.2);
  const Dataset d = affine_data(a, b, 6);
  const NodeSet nodes = testing::grid({{0, 1}, {0, 1}}, 5);
  const SurrogateModel m = fit_dynamics(nodes, d, 8.0, 0.0);
  for (const FitReport& r : m.reports) CHECK(r.training_rms <= 1e-8);

  Rng rng(12);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Point x = pt({rng.uniform(), rng.uniform()});
    worst = std::max(worst, (eval_field(m, x) - (a * x + b)).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("zero and constant fields") {
  Dataset d = affine_data(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(), 5);
  const NodeSet nodes = testing::grid({{0, 1}, {0, 1}}, 4);
  const SurrogateModel zero = fit_dynamics(nodes, d, 5.0, 0.0);
  CHECK(zero.coefficients.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(eval_field(zero, pt({0.3, 0.6})).cwiseAbs().maxCoeff() <= 1e-14);

  d.values.col(0).setConstant(1.5);
  d.values.col(1).setConstant(-2.0);
  const SurrogateModel c = fit_dynamics(nodes, d, 5.0, 0.0);
  CHECK((eval_field(c, pt({0.11, 0.87})) - Eigen::Vector2d(1.5, -2.0)).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("shared basis cache equals independent fits") {
  Rng rng(3);
  Dataset d;
  d.points.resize(3, 60);
  for (Eigen::Index i = 0; i < d.points.size(); ++i) d.points(i) = rng.uniform(0.05, 0.95);
  d.values.resize(60, 3);
  for (Eigen::Index i = 0; i < 60; ++i) {
    const Point x = d.points.col(i);
    d.values.row(i) << std::sin(3 * x(0)), x(1) * x(2), std::exp(-x(0) - x(2));
  }
  const NodeSet nodes = testing::grid({{0, 1}, {0, 1}, {0, 1}}, 3);
  const SurrogateModel m = fit_dynamics(nodes, d, 4.0, 0.0);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Approximant single = fit(nodes, d.column(j), 4.0, 0.0);
    CHECK((single.coefficients - m.coefficients.col(j)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  // Component independence: permuting the other columns leaves column 0 alone.
  Dataset p = d;
  p.values.col(1) = d.values.col(2);
  p.values.col(2) = d.values.col(1);
  const SurrogateModel mp = fit_dynamics(nodes, p, 4.0, 0.0);
  CHECK(mp.coefficients.col(0) == m.coefficients.col(0));
  CHECK(mp.coefficients.col(1) == m.coefficients.col(2));
}

TEST_CASE("dynamics fit errors carry the component") {
  Dataset d = affine_data(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 4);
  const NodeSet nodes = testing::grid({{0, 1}, {0, 1}}, 4);
  SolverOptions one;
  one.max_iter = 1;
  CHECK_THROWS_WITH_AS(fit_dynamics(nodes, d, 30.0, 0.0, one), doctest::Contains("component 0"), FitError);
  Dataset wrong = d;
  wrong.values.conservativeResize(Eigen::NoChange, 1);
  CHECK_THROWS_AS(fit_dynamics(nodes, wrong, 1.0, 0.0), DimensionError);
}

TEST_CASE("surrogate rollouts") {
  // x' = (-y, x): circles around (0.5, 0.5) stay inside the unit square.
  Eigen::Matrix2d a;
  a << 0, -1, 1, 0;
  const Eigen::Vector2d b(0.5, -0.5);
  const SurrogateModel m = fit_dynamics(testing::grid({{0, 1}, {0, 1}}, 5), affine_data(a, b, 6), 8.0, 0.0);

  const Integration ok = integrate(m, pt({0.7, 0.5}), 0.0, 6.3, 0.05);
  CHECK(ok.completed());
  const VectorField truth = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x + b; };
  const Integration ref = integrate(truth, pt({0.7, 0.5}), 0.0, 6.3, 0.05);
  CHECK(trajectory_rms(ok.trajectory, ref.trajectory) <= 1e-7);

  // Radius 0.6 leaves the square.
  const Integration out = integrate(m, pt({0.5, 1.0}), 0.0, 6.3, 0.05);
  CHECK(out.status == IntegrationStatus::DomainExit);
  CHECK(out.last_time < 6.3);
  CHECK(out.trajectory.samples() >= 1);

  CHECK_THROWS_AS(integrate(m, pt({1.2, 0.5}), 0.0, 1.0, 0.1), OutsideHullError);
}

TEST_CASE("Lorenz surrogate generalizes to held-out trajectory points") {
  ExperimentConfig c = default_experiment_config("lorenz");
  const DynamicsProblem p = gen_lorenz(c);
  const SurrogateModel m = fit_dynamics(p.nodes, p.train, c.beta, c.alpha, c.solver);

  // Held-out states: midpoints between consecutive samples along the truth.
  Rng rng(5);
  Eigen::MatrixXd pred(100, 3), exact(100, 3);
  for (int k = 0; k < 100; ++k) {
    const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(p.truth.samples() - 1)));
    const Point x0 = p.truth.states.row(i).transpose();
    const Integration half = integrate(p.field, x0, 0.0, 0.5 * p.dt, 0.5 * p.dt);
    const Point x = half.trajectory.states.bottomRows<1>().transpose();
    pred.row(k) = eval_field(m, x).transpose();
    exact.row(k) = p.field(x).transpose();
  }
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double held = rms(pred.col(j) - exact.col(j));
    const double train = m.reports[static_cast<std::size_t>(j)].training_rms;
    MESSAGE("component " << j << ": held-out RMS " << held << ", training RMS " << train);
    CHECK(held <= 10.0 * train);
  }
}
