#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "helpers.hpp"
#include "maxent/io.hpp"
#include "maxent/random.hpp"

using namespace maxent;
using testing::pt;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "maxent_test_io";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

struct EnvGuard {
  std::string name;
  EnvGuard(std::string n, const std::string& value) : name(std::move(n)) { ::setenv(name.c_str(), value.c_str(), 1); }
  ~EnvGuard() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("format_number round-trips doubles") {
  Rng rng(4);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.index(200)) - 100);
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
  CHECK(std::strtod(format_number(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
        std::numeric_limits<double>::denorm_min());
}

TEST_CASE("CSV parse and serialize round-trip") {
  Rng rng(8);
  CsvTable t;
  t.header = {"x1", "x2", "f"};
  t.rows.resize(50, 3);
  for (Eigen::Index i = 0; i < t.rows.size(); ++i) t.rows(i) = rng.uniform(-1e3, 1e3) / 7.0;
  const CsvTable back = parse_csv(format_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(format_csv(back) == format_csv(t));

  const CsvTable crlf = parse_csv("x1,f\r\n1,2\r\n\r\n3,4e-3\r\n");
  CHECK(crlf.rows.rows() == 2);
  CHECK(crlf.rows(1, 1) == 4e-3);
}

TEST_CASE("CSV parse errors") {
  CHECK_THROWS_AS(parse_csv(""), ParseError);
  CHECK_THROWS_AS(parse_csv("x1,,f\n1,2,3\n"), ParseError);
  try {
    parse_csv("x1,f\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    parse_csv("x1,f\n1,2\n3,abc\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_csv("x1\nnan\n"), ParseError);
  CHECK_THROWS_AS(read_csv(temp_path("does_not_exist.csv")), ParseError);
}

TEST_CASE("dataset layouts follow the header") {
  CHECK(dataset_from_csv(parse_csv("x1,x2\n0,1\n")).layout == ColumnLayout::PointsOnly);
  const CsvDataset f = dataset_from_csv(parse_csv("x1,x2,f\n0,1,5\n2,3,6\n"));
  CHECK(f.layout == ColumnLayout::Function);
  CHECK(f.data.points == (Eigen::Matrix2d() << 0, 2, 1, 3).finished());
  CHECK(f.data.values == Eigen::Vector2d(5, 6));
  const CsvDataset dyn = dataset_from_csv(parse_csv("x1,x2,dx1,dx2\n0,1,2,3\n"));
  CHECK(dyn.layout == ColumnLayout::Dynamics);
  CHECK(dyn.data.values == Eigen::RowVector2d(2, 3));

  CHECK_THROWS_AS(dataset_from_csv(parse_csv("y,f\n0,1\n")), ParseError);
  CHECK_THROWS_AS(dataset_from_csv(parse_csv("x1,x2,dx2,dx1\n0,1,2,3\n")), ParseError);
  CHECK_THROWS_AS(dataset_from_csv(parse_csv("x1,f\n")), ParseError);

  CHECK(format_csv(dataset_to_csv(f.data, ColumnLayout::Function)) == "x1,x2,f\n0,1,5\n2,3,6\n");
}

TEST_CASE("model file round-trip") {
  Rng rng(21);
  Dataset d;
  d.points.resize(2, 40);
  for (Eigen::Index i = 0; i < d.points.size(); ++i) d.points(i) = rng.uniform(0.02, 0.98);
  d.values.resize(40, 1);
  for (Eigen::Index i = 0; i < 40; ++i) d.values(i, 0) = std::sin(4 * d.points(0, i)) * d.points(1, i);
  const Approximant a = fit(testing::grid({{0, 1}, {0, 1}}, 5), d, 7.3, 0.0);

  const std::string path = temp_path("model.json");
  save_model(path, StoredModel::from(a));
  const StoredModel loaded = load_model(path);
  CHECK(loaded.kind == StoredModel::Kind::Function);
  const Approximant b = loaded.approximant();
  CHECK(b.nodes == a.nodes);
  CHECK(b.beta == a.beta);
  CHECK(b.coefficients == a.coefficients);
  CHECK(b.report.training_rms == a.report.training_rms);
  for (int k = 0; k < 50; ++k) {
    const Point x = pt({rng.uniform(), rng.uniform()});
    CHECK(std::abs(predict(b, x) - predict(a, x)) <= 1e-15);
  }
  CHECK(model_to_json(loaded) == model_to_json(StoredModel::from(a)));
  CHECK_THROWS_AS(loaded.surrogate(), DimensionError);

  CHECK_THROWS_AS(model_from_json("{"), ParseError);
  CHECK_THROWS_AS(model_from_json(R"({"format": "other"})"), ParseError);
  std::string wrong = model_to_json(loaded);
  wrong.replace(wrong.find("\"version\": 1"), 12, "\"version\": 9");
  CHECK_THROWS_AS(model_from_json(wrong), ParseError);
}

TEST_CASE("run configuration sources and precedence") {
  const RunConfig def = load_run_config(std::nullopt, {}, false);
  CHECK(def.beta == 10.0);
  CHECK(def.node_counts == std::vector<int>{5});

  const std::string path = temp_path("run.json");
  write_text_file(path, R"({"beta": 3.5, "nodes": {"counts": [4, 6]}, "solver": {"tol": 1e-11}})");
  const RunConfig file = load_run_config(path, {}, false);
  CHECK(file.beta == 3.5);
  CHECK(file.node_counts == std::vector<int>{4, 6});
  CHECK(file.solver.tol == 1e-11);
  CHECK(file.alpha == 0.0);

  {
    const EnvGuard g(env_var_for("beta"), "7");
    const EnvGuard s(env_var_for("solver.max_iter"), "33");
    CHECK(env_var_for("solver.max_iter") == "MAXENT_SOLVER_MAX_ITER");
    const RunConfig env = load_run_config(path, {}, true);
    CHECK(env.beta == 7.0);
    CHECK(env.solver.max_iter == 33);
    CHECK(load_run_config(path, {"beta=8"}, true).beta == 8.0);
    CHECK(load_run_config(path, {}, false).beta == 3.5);
  }

  CHECK_THROWS_AS(load_run_config(std::nullopt, {"betta=1"}, false), ConfigError);
  CHECK_THROWS_AS(load_run_config(std::nullopt, {"beta"}, false), ConfigError);
  CHECK_THROWS_AS(load_run_config(std::nullopt, {"beta=\"high\""}, false), ConfigError);
  CHECK_THROWS_AS(load_run_config(std::nullopt, {"beta=-1"}, false), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"unknown": 1})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("[1]"), ConfigError);

  const std::vector<std::string> keys = run_config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "solver.hull_tol") != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "nodes.bounds") != keys.end());
}

TEST_CASE("printed configuration is a fixpoint") {
  RunConfig c = load_run_config(std::nullopt, {"alpha=0.01", "nodes.bounds=[[0,1],[-2,2]]", "seed=99"}, false);
  const std::string once = run_config_to_json(c);
  const RunConfig again = run_config_from_json(once);
  CHECK(run_config_to_json(again) == once);
  CHECK(again.node_bounds.size() == 2);
  CHECK(again.node_bounds[1].low == -2.0);
  CHECK(again.seed == 99);
}

TEST_CASE("build_nodes") {
  Dataset d;
  d.points = (Eigen::MatrixXd(2, 4) << 0, 1, 0, 1, 0, 0, 2, 2).finished();
  d.values = Eigen::VectorXd::Zero(4);
  RunConfig c;
  c.node_counts = {3};
  const NodeSet g = build_nodes(c, d);
  CHECK(g.size() == 9);
  CHECK(g.coords().row(1).maxCoeff() == 2.0);

  c.nodes_from_data = true;
  CHECK(build_nodes(c, d).coords() == d.points);

  c.nodes_from_data = false;
  c.node_counts = {2, 2, 2};
  CHECK_THROWS_AS(build_nodes(c, d), ConfigError);
}
