#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "maxent/errors.hpp"
#include "maxent/experiments.hpp"

using namespace maxent;
using testing::pt;

namespace {

bool all_inside(const NodeSet& nodes, const Eigen::MatrixXd& points) {
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (in_hull(nodes, points.col(i)).membership == Membership::Outside) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("experiment names and defaults") {
  CHECK(experiment_names() ==
        std::vector<std::string>{"sine", "gauss2d", "rosenbrock", "lorenz", "orbit", "orbit-sparse"});
  CHECK_THROWS_AS(default_experiment_config("heat"), ConfigError);
  CHECK_THROWS_AS(run_experiment("heat"), ConfigError);
  const ExperimentConfig s = default_experiment_config("sine");
  CHECK(s.beta == 100.0);
  CHECK(s.alpha == 0.0);
  CHECK(s.nodes_per_axis == 10);
  CHECK(s.n_train == 20);
  CHECK(s.n_test == 50);
  CHECK(default_experiment_config("gauss2d").beta == 10.0);
  CHECK(default_experiment_config("rosenbrock").beta == 5.0);
}

TEST_CASE("sine generator") {
  ExperimentConfig c = default_experiment_config("sine");
  const FunctionProblem p = gen_sine(c);
  CHECK(p.train.size() == 20);
  CHECK(p.test.size() == 50);
  CHECK(p.nodes.size() == 10);
  CHECK(p.test.points(0, 0) == 0.0);
  CHECK(p.test.points(0, 49) == 1.0);
  for (Eigen::Index i = 0; i < 20; ++i) {
    CHECK(p.train.values(i, 0) == std::sin(2 * std::numbers::pi * p.train.points(0, i)));
    CHECK(p.train.points(0, i) >= 0.0);
    CHECK(p.train.points(0, i) <= 1.0);
  }

  c.seed = 2;
  const FunctionProblem q = gen_sine(c);
  CHECK(q.train.points != p.train.points);
  CHECK(q.nodes == p.nodes);
  CHECK(gen_sine(default_experiment_config("sine")).train.points == p.train.points);

  c.n_train = 0;
  CHECK_THROWS_AS(gen_sine(c), ConfigError);
}

TEST_CASE("2-D function generators") {
  CHECK(gauss2d_function(pt({0.5, 0.5})) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(gauss2d_function(pt({0.0, 0.7})) == 0.0);
  CHECK(gauss2d_function(pt({0.5, 0.5}), "caption") == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-15));
  CHECK(rosenbrock_function(pt({1.0, 1.0})) == 0.0);
  CHECK(rosenbrock_function(pt({0.0, 0.0})) == 1.0);

  const FunctionProblem g = gen_gauss2d(default_experiment_config("gauss2d"));
  CHECK(g.nodes.size() == 64);
  CHECK(g.train.size() == 256);
  CHECK(g.test.size() == 1024);
  const FunctionProblem r = gen_rosenbrock(default_experiment_config("rosenbrock"));
  CHECK(r.nodes.size() == 64);
  CHECK(r.train.size() == 256);
  CHECK(r.test.size() == 1024);
  CHECK(r.nodes.coords().minCoeff() == -1.0);
  CHECK(r.nodes.coords().maxCoeff() == 1.0);
  CHECK(all_inside(r.nodes, r.train.points));
}

TEST_CASE("Lorenz generator") {
  CHECK(lorenz_field(Eigen::Vector3d(1, 1, 1), 10, 28, 8.0 / 3.0).isApprox(Eigen::Vector3d(0, 26, 1 - 8.0 / 3.0), 1e-15));
  const ExperimentConfig c = default_experiment_config("lorenz");
  const DynamicsProblem p = gen_lorenz(c);
  CHECK(p.train.size() == 500);
  CHECK(p.train.outputs() == 3);
  CHECK(p.nodes.size() == 225);
  CHECK(all_inside(p.nodes, p.train.points));
  for (Eigen::Index i = 0; i < p.train.size(); i += 37) {
    CHECK((p.field(p.train.points.col(i)) - p.train.values.row(i).transpose()).norm() == 0.0);
  }
}

TEST_CASE("orbit generator") {
  const double h0 = std::sqrt(1.1 * 1.2);
  CHECK(orbit_field(Eigen::Vector4d(1.3, 0.1, std::numbers::pi / 2, 0.5), 1.0, 0.2, h0)(1) ==
        doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
  for (double th : {0.0, 1.0, 2.5}) {
    CHECK(orbit_field(Eigen::Vector4d(1.0, 0.0, th, 1.0), 1.0, 0.0, 1.0)(1) == 0.0);
  }

  ExperimentConfig c = default_experiment_config("orbit");
  const DynamicsProblem p = gen_orbit(c);
  CHECK(p.train.size() == 500);
  CHECK(p.nodes.size() == 625 + 100);
  CHECK(p.period == doctest::Approx(2 * std::numbers::pi * std::pow(1.1 / 0.8, 1.5)).epsilon(1e-14));
  CHECK(p.horizon == doctest::Approx(2 * p.period).epsilon(1e-12));
  CHECK(all_inside(p.nodes, p.train.points));
  const Eigen::ArrayXd r = p.truth.states.col(0).array();
  const Eigen::ArrayXd h = r.square() * p.truth.states.col(3).array();
  CHECK((h / p.angular_momentum - 1.0).abs().maxCoeff() <= 1e-8);
  CHECK(r.minCoeff() == doctest::Approx(1.1).epsilon(1e-6));

  const DynamicsProblem s = gen_orbit(default_experiment_config("orbit-sparse"));
  CHECK(s.train.size() == 20);
  CHECK(s.nodes.size() == 625 + 20);

  c.orbit_eccentricity = 1.0;
  CHECK_THROWS_AS(gen_orbit(c), ConfigError);
}

TEST_CASE("overrides and configuration JSON") {
  const ExperimentConfig c = apply_overrides(default_experiment_config("gauss2d"), {"beta=0", "seed=5", "bounds=[[0,2],[0,1]]"});
  CHECK(c.beta == 0.0);
  CHECK(c.seed == 5);
  CHECK(c.bounds[0].high == 2.0);
  CHECK_THROWS_AS(apply_overrides(c, {"nodes=3"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(c, {"name=\"sine\""}), ConfigError);

  const std::string text = experiment_config_to_json(c);
  CHECK(experiment_config_to_json(experiment_config_from_json(text)) == text);
}

TEST_CASE("beta = 0 runs the global variant") {
  const Report r = run_experiment("sine", {"beta=0"});
  CHECK(r.config_json.find("\"beta\": 0") != std::string::npos);
  // Global basis on 10 nodes cannot follow one full sine period as well as the local one.
  CHECK(r.training_rms > run_experiment("sine").training_rms);
}

TEST_CASE("reports round-trip and are deterministic") {
  for (const std::string name : {"sine", "lorenz"}) {
    ExperimentArtifacts a, b;
    const Report r1 = run_experiment(name, {"baseline=true"}, &a);
    const Report r2 = run_experiment(name, {"baseline=true"}, &b);
    const std::string j = report_to_json(r1);
    CHECK(j == report_to_json(r2));
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t k = 0; k < a.files.size(); ++k) {
      CHECK(a.files[k].first == b.files[k].first);
      CHECK(a.files[k].second == b.files[k].second);
    }
    CHECK(report_to_json(report_from_json(j)) == j);
  }
}

TEST_CASE("every sine RMS can be recomputed from the artifacts") {
  ExperimentArtifacts a;
  const Report r = run_experiment("sine", {}, &a);
  REQUIRE(r.test_rms.has_value());
  bool saw_predictions = false;
  for (const auto& [name, text] : a.files) {
    if (name != "test_predictions.csv") continue;
    saw_predictions = true;
    double sum = 0.0;
    int rows = 0;
    std::size_t pos = text.find('\n') + 1;
    while (pos < text.size()) {
      const std::size_t end = text.find('\n', pos);
      const std::string line = text.substr(pos, end - pos);
      const std::size_t c1 = line.find(','), c2 = line.find(',', c1 + 1);
      const double f = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const double pred = std::stod(line.substr(c2 + 1));
      sum += (f - pred) * (f - pred);
      ++rows;
      pos = end + 1;
    }
    CHECK(rows == 50);
    CHECK(std::sqrt(sum / rows) == doctest::Approx(*r.test_rms).epsilon(1e-12));
  }
  CHECK(saw_predictions);
}
