#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maxent/baselines.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/errors.hpp"
#include "maxent/experiments.hpp"
#include "maxent/random.hpp"

using namespace maxent;
using testing::pt;

namespace {

Eigen::Index monomial(const Dictionary& d, std::vector<int> powers) {
  for (std::size_t k = 0; k < d.features().size(); ++k) {
    const auto& f = d.features()[k];
    if (f.kind == Dictionary::Feature::Kind::Monomial && f.powers == powers) return static_cast<Eigen::Index>(k);
  }
  FAIL("no such monomial");
  return -1;
}

Dataset scalar_data(const Eigen::MatrixXd& points, const Eigen::VectorXd& values) {
  Dataset d;
  d.points = points;
  d.values = values;
  return d;
}

}  // namespace

TEST_CASE("dictionary layout") {
  const Dictionary d = Dictionary::polynomial(2, 2);
  REQUIRE(d.size() == 6);
  CHECK(d.names() == std::vector<std::string>{"1", "x1", "x2", "x1^2", "x1*x2", "x2^2"});
  CHECK(d.evaluate(pt({2.0, 3.0})) == (Eigen::VectorXd(6) << 1, 2, 3, 4, 6, 9).finished());

  const Dictionary t = Dictionary::polynomial(1, 1, true, {1.0, 2.0});
  REQUIRE(t.size() == 6);
  const Eigen::VectorXd v = t.evaluate(pt({0.3}));
  CHECK(v(0) == 1.0);
  CHECK(v(2) == std::sin(0.3));
  CHECK(v(3) == std::cos(0.3));
  CHECK(v(4) == std::sin(0.6));
  CHECK(v(5) == std::cos(0.6));

  CHECK(Dictionary::polynomial(3, 4).size() == 35);
  CHECK_THROWS_AS(Dictionary::polynomial(0, 2), ConfigError);
  CHECK_THROWS_AS(d.evaluate(pt({1.0})), DimensionError);
}

TEST_CASE("y = 2x + 1 is recovered exactly") {
  Eigen::MatrixXd x(1, 11);
  for (int i = 0; i < 11; ++i) x(0, i) = -1.0 + 0.2 * i;
  const Eigen::VectorXd y = (2.0 * x.row(0).array() + 1.0).matrix().transpose();
  const DictionaryModel m = dict_fit(Dictionary::polynomial(1, 2), scalar_data(x, y), 0.1, 10);
  CHECK(m.coefficients(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.coefficients(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.coefficients(2, 0) == 0.0);
  CHECK_FALSE(m.emptied[0]);
}

TEST_CASE("Rosenbrock is in the span of degree-4 polynomials") {
  ExperimentConfig c = default_experiment_config("rosenbrock");
  const FunctionProblem p = gen_rosenbrock(c);
  const DictionaryModel m = dict_fit(Dictionary::polynomial(2, 4), p.train, 0.05, 10);
  const Eigen::MatrixXd pred = dict_predict_many(m, p.test.points);
  const double err = rms(pred.col(0) - p.test.values.col(0));
  MESSAGE("Rosenbrock baseline test RMS " << err);
  CHECK(err <= 1e-10);
}

TEST_CASE("Lorenz coefficients are recovered") {
  ExperimentConfig c = default_experiment_config("lorenz");
  const DynamicsProblem p = gen_lorenz(c);
  const Dictionary d = Dictionary::polynomial(3, 2);
  const DictionaryModel m = dict_fit(d, p.train, 0.05, 10);

  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(d.size(), 3);
  want(monomial(d, {1, 0, 0}), 0) = -10.0;
  want(monomial(d, {0, 1, 0}), 0) = 10.0;
  want(monomial(d, {1, 0, 0}), 1) = 28.0;
  want(monomial(d, {0, 1, 0}), 1) = -1.0;
  want(monomial(d, {1, 0, 1}), 1) = -1.0;
  want(monomial(d, {1, 1, 0}), 2) = 1.0;
  want(monomial(d, {0, 0, 1}), 2) = -8.0 / 3.0;
  CHECK((m.coefficients - want).cwiseAbs().maxCoeff() <= 1e-6);

  // Short-horizon rollout of the recovered model against the truth.
  const VectorField recovered = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return dict_predict(m, x); };
  const Point x0 = p.truth.states.row(0).transpose();
  const double t1 = p.truth.times(0) + 1.0;
  const Integration a = integrate(recovered, x0, p.truth.times(0), t1, p.dt);
  const Integration b = integrate(p.field, x0, p.truth.times(0), t1, p.dt);
  REQUIRE(a.completed());
  const double err = trajectory_rms(a.trajectory, b.trajectory);
  MESSAGE("recovered Lorenz rollout RMS " << err);
  CHECK(err <= 1e-6);
}

TEST_CASE("in-span targets are fitted exactly and thresholding is idempotent") {
  Rng rng(9);
  const Dictionary d = Dictionary::polynomial(2, 3, true, {1.0});
  Eigen::MatrixXd x(2, 80);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-2, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d.size());
  for (Eigen::Index k = 0; k < d.size(); k += 2) c(k) = rng.uniform(0.5, 3.0);
  const Eigen::VectorXd y = d.design(x) * c;

  const DictionaryModel m = dict_fit(d, scalar_data(x, y), 0.1, 10);
  CHECK(rms(d.design(x) * m.coefficients.col(0) - y) <= 1e-8);
  CHECK((m.coefficients.col(0) - c).cwiseAbs().maxCoeff() <= 1e-8);

  const DictionaryModel more = dict_fit(d, scalar_data(x, y), 0.1, 50);
  CHECK(more.coefficients == m.coefficients);
  CHECK(more.sweeps_used == m.sweeps_used);
}

TEST_CASE("zero and constant models") {
  DictionaryModel zero;
  zero.dictionary = Dictionary::polynomial(2, 2);
  zero.coefficients = Eigen::MatrixXd::Zero(6, 2);
  CHECK(dict_predict(zero, pt({0.4, -3.0})) == Eigen::Vector2d::Zero());

  Eigen::MatrixXd x(1, 5);
  x << 0, 1, 2, 3, 4;
  const DictionaryModel k = dict_fit(Dictionary::polynomial(1, 3), scalar_data(x, Eigen::VectorXd::Constant(5, 4.5)));
  CHECK(dict_predict(k, pt({17.0}))(0) == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(k.coefficients.col(0).tail(3).isZero(0.0));
}

TEST_CASE("everything thresholded away yields a zero model with a warning flag") {
  Eigen::MatrixXd x(1, 6);
  x << 0, 1, 2, 3, 4, 5;
  const DictionaryModel m = dict_fit(Dictionary::polynomial(1, 1), scalar_data(x, Eigen::VectorXd::Constant(6, 1e-3)), 0.5);
  CHECK(m.emptied[0]);
  CHECK(m.coefficients.isZero(0.0));
}

TEST_CASE("dict_fit argument errors") {
  Eigen::MatrixXd x(1, 3);
  x << 0, 1, 2;
  const Dataset d = scalar_data(x, Eigen::Vector3d(1, 2, 3));
  CHECK_THROWS_AS(dict_fit(Dictionary::polynomial(1, 1), d, 0.1, 0), ConfigError);
  CHECK_THROWS_AS(dict_fit(Dictionary::polynomial(1, 1), d, -1.0, 1), ConfigError);
  CHECK_THROWS_AS(dict_fit(Dictionary::polynomial(2, 1), d, 0.1, 1), DimensionError);
}
