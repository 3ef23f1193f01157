#include "maxent/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "config_util.hpp"
#include "maxent/baselines.hpp"
#include "maxent/errors.hpp"
#include "maxent/io.hpp"
#include "maxent/random.hpp"

namespace maxent {

using detail::json;

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sine",   "gauss2d", "rosenbrock",
                                              "lorenz", "orbit",   "orbit-sparse"};
  return names;
}

ExperimentConfig default_experiment_config(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "sine") {
    c.nodes_per_axis = 10;
    c.n_train = 20;
    c.n_test = 50;
    c.beta = 100.0;
    c.bounds = {{0.0, 1.0}};
    c.baseline_frequency = 2.0 * std::numbers::pi;
  } else if (name == "gauss2d" || name == "rosenbrock") {
    const double lo = (name == "gauss2d") ? 0.0 : -1.0;
    c.nodes_per_axis = 8;
    c.n_train = 16;
    c.n_test = 32;
    c.beta = (name == "gauss2d") ? 10.0 : 5.0;
    c.bounds = {{lo, 1.0}, {lo, 1.0}};
  } else if (name == "lorenz") {
    c.nodes_per_axis = 5;
    c.n_train = 500;
    c.n_test = 0;
    c.beta = 0.01;
    c.bounds.clear();
    c.sample_dt = 0.01;
    c.n_augment = 100;
    c.baseline_degree = 2;
    c.baseline_trig = false;
  } else if (name == "orbit" || name == "orbit-sparse") {
    const bool sparse = name == "orbit-sparse";
    c.nodes_per_axis = 5;
    c.n_train = sparse ? 20 : 500;
    c.n_test = 0;
    c.beta = 0.5;
    c.bounds.clear();
    c.n_augment = sparse ? 20 : 100;
    c.orbit_periods = sparse ? 1.0 : 2.0;
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return c;
}

namespace {

json config_nested(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["nodes_per_axis"] = c.nodes_per_axis;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["beta"] = c.beta;
  j["alpha"] = c.alpha;
  j["bounds"] = detail::bounds_to_json(c.bounds);
  j["nodes_from_data"] = c.nodes_from_data;
  j["gauss_form"] = c.gauss_form;
  j["sample_dt"] = c.sample_dt;
  j["node_pad"] = c.node_pad;
  j["n_augment"] = c.n_augment;
  j["augment_seed"] = c.augment_seed;
  j["rollout_fraction"] = c.rollout_fraction;
  j["lorenz_sigma"] = c.lorenz_sigma;
  j["lorenz_rho"] = c.lorenz_rho;
  j["lorenz_gamma"] = c.lorenz_gamma;
  j["lorenz_spinup"] = c.lorenz_spinup;
  j["orbit_mu"] = c.orbit_mu;
  j["orbit_eccentricity"] = c.orbit_eccentricity;
  j["orbit_perigee"] = c.orbit_perigee;
  j["orbit_periods"] = c.orbit_periods;
  j["orbit_steps_per_period"] = c.orbit_steps_per_period;
  j["orbit_baseline_window"] = c.orbit_baseline_window;
  j["baseline"] = c.baseline;
  j["baseline_degree"] = c.baseline_degree;
  j["baseline_trig"] = c.baseline_trig;
  j["baseline_frequency"] = c.baseline_frequency;
  j["baseline_threshold"] = c.baseline_threshold;
  j["baseline_sweeps"] = c.baseline_sweeps;
  j["solver"] = {{"tol", c.solver.tol},
                 {"max_iter", c.solver.max_iter},
                 {"hessian_ridge", c.solver.hessian_ridge},
                 {"line_search_shrink", c.solver.line_search_shrink},
                 {"hull_tol", c.solver.hull_tol}};
  j["l1"] = {{"max_iter", c.l1.max_iter}, {"tol", c.l1.tol}};
  return j;
}

ExperimentConfig config_from_flat(const json& f) {
  ExperimentConfig c;
  c.name = f.at("name").get<std::string>();
  c.seed = f.at("seed").get<std::uint64_t>();
  c.threads = f.at("threads").get<int>();
  c.nodes_per_axis = f.at("nodes_per_axis").get<int>();
  c.n_train = f.at("n_train").get<int>();
  c.n_test = f.at("n_test").get<int>();
  c.beta = f.at("beta").get<double>();
  c.alpha = f.at("alpha").get<double>();
  c.bounds = detail::bounds_from_json(f.at("bounds"));
  c.nodes_from_data = f.at("nodes_from_data").get<bool>();
  c.gauss_form = f.at("gauss_form").get<std::string>();
  c.sample_dt = f.at("sample_dt").get<double>();
  c.node_pad = f.at("node_pad").get<double>();
  c.n_augment = f.at("n_augment").get<int>();
  c.augment_seed = f.at("augment_seed").get<std::uint64_t>();
  c.rollout_fraction = f.at("rollout_fraction").get<double>();
  c.lorenz_sigma = f.at("lorenz_sigma").get<double>();
  c.lorenz_rho = f.at("lorenz_rho").get<double>();
  c.lorenz_gamma = f.at("lorenz_gamma").get<double>();
  c.lorenz_spinup = f.at("lorenz_spinup").get<double>();
  c.orbit_mu = f.at("orbit_mu").get<double>();
  c.orbit_eccentricity = f.at("orbit_eccentricity").get<double>();
  c.orbit_perigee = f.at("orbit_perigee").get<double>();
  c.orbit_periods = f.at("orbit_periods").get<double>();
  c.orbit_steps_per_period = f.at("orbit_steps_per_period").get<int>();
  c.orbit_baseline_window = f.at("orbit_baseline_window").get<double>();
  c.baseline = f.at("baseline").get<bool>();
  c.baseline_degree = f.at("baseline_degree").get<int>();
  c.baseline_trig = f.at("baseline_trig").get<bool>();
  c.baseline_frequency = f.at("baseline_frequency").get<double>();
  c.baseline_threshold = f.at("baseline_threshold").get<double>();
  c.baseline_sweeps = f.at("baseline_sweeps").get<int>();
  c.solver.tol = f.at("solver.tol").get<double>();
  c.solver.max_iter = f.at("solver.max_iter").get<int>();
  c.solver.hessian_ridge = f.at("solver.hessian_ridge").get<double>();
  c.solver.line_search_shrink = f.at("solver.line_search_shrink").get<double>();
  c.solver.hull_tol = f.at("solver.hull_tol").get<double>();
  c.l1.max_iter = f.at("l1.max_iter").get<int>();
  c.l1.tol = f.at("l1.tol").get<double>();
  c.solver.validate();
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (!(c.beta >= 0.0) || !(c.alpha >= 0.0)) throw ConfigError("beta and alpha must be >= 0");
  return c;
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig config, const std::vector<std::string>& overrides) {
  json flat = detail::flatten(config_nested(config));
  json incoming = json::object();
  for (const auto& o : overrides) {
    auto [k, v] = detail::parse_override(o);
    if (k == "name") throw ConfigError("the experiment name cannot be overridden");
    incoming[k] = v;
  }
  detail::merge_checked(flat, incoming, "--set");
  return config_from_flat(flat);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return config_nested(config).dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("experiment config is not a JSON object");
  if (!j.contains("name") || !j["name"].is_string()) throw ConfigError("experiment config needs a name");
  json flat = detail::flatten(config_nested(default_experiment_config(j["name"].get<std::string>())));
  detail::merge_checked(flat, detail::flatten(j), "experiment config");
  return config_from_flat(flat);
}

// ---------------------------------------------------------------------------
// Reference functions and systems

double sine_function(double x) { return std::sin(2.0 * std::numbers::pi * x); }

double gauss2d_function(const Point& x, const std::string& form) {
  const double r2 = x.squaredNorm();
  if (form == "heading") return 2.0 * x(0) * std::exp(-4.0 * r2);
  if (form == "caption") return x(0) * std::exp(-r2);
  throw ConfigError("gauss_form must be 'heading' or 'caption'");
}

double rosenbrock_function(const Point& x) {
  const double a = 1.0 - x(0);
  const double b = x(1) - x(0) * x(0);
  return a * a + 100.0 * b * b;
}

Eigen::Vector3d lorenz_field(const Eigen::Vector3d& x, double sigma, double rho, double gamma) {
  return {sigma * (x(1) - x(0)), x(0) * (rho - x(2)) - x(1), x(0) * x(1) - gamma * x(2)};
}

Eigen::Vector4d orbit_field(const Eigen::Vector4d& x, double mu, double eccentricity, double h0) {
  return {x(1), mu * eccentricity / h0 * x(3) * std::cos(x(2)), x(3), -2.0 * x(3) * x(1) / x(0)};
}

// ---------------------------------------------------------------------------
// Generators

namespace {

Dataset grid_dataset(const std::vector<Interval>& bounds, int per_axis,
                     const std::function<double(const Point&)>& f) {
  const std::vector<int> counts(bounds.size(), per_axis);
  Dataset d;
  d.points = grid_nodes(bounds, counts).coords();
  d.values.resize(d.points.cols(), 1);
  for (Eigen::Index i = 0; i < d.points.cols(); ++i) d.values(i, 0) = f(d.points.col(i));
  return d;
}

NodeSet function_nodes(const ExperimentConfig& c, const Dataset& train) {
  if (c.nodes_from_data) return NodeSet(train.points);
  const std::vector<int> counts(c.bounds.size(), c.nodes_per_axis);
  return grid_nodes(c.bounds, counts);
}

FunctionProblem grid_problem(const ExperimentConfig& c, std::size_t dims,
                             const std::function<double(const Point&)>& f) {
  if (c.bounds.size() != dims) throw ConfigError(c.name + " needs " + std::to_string(dims) + " bounds");
  if (c.n_train < 2 || c.n_test < 2) throw ConfigError("grid experiments need n_train, n_test >= 2");
  FunctionProblem p;
  p.train = grid_dataset(c.bounds, c.n_train, f);
  p.test = grid_dataset(c.bounds, c.n_test, f);
  p.nodes = function_nodes(c, p.train);
  return p;
}

void require_inside(const NodeSet& nodes, const Eigen::MatrixXd& points, double tol) {
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (in_hull(nodes, points.col(i), tol).membership == Membership::Outside) {
      throw OutsideHullError("generated sample " + std::to_string(i) + " lies outside the node hull",
                             {static_cast<std::size_t>(i)});
    }
  }
}

// Bounding-box grid of `extent` plus augmentation from the training points.
// Retries once with doubled padding if any training point falls outside.
NodeSet trajectory_nodes(const ExperimentConfig& c, const Eigen::MatrixXd& extent,
                         const Eigen::MatrixXd& train_points, bool& short_of_candidates) {
  double pad = c.node_pad;
  for (int attempt = 0;; ++attempt) {
    const auto box = bounding_box(extent, pad);
    const std::vector<int> counts(box.size(), c.nodes_per_axis);
    const NodeSet grid = grid_nodes(box, counts);
    const auto k = static_cast<std::size_t>(std::max(c.n_augment, 0));
    Augmentation aug = augment_nodes(grid, train_points, std::min<std::size_t>(k, static_cast<std::size_t>(train_points.cols())), c.augment_seed);
    short_of_candidates = aug.short_of_candidates || k > static_cast<std::size_t>(train_points.cols());
    try {
      require_inside(aug.nodes, train_points, c.solver.hull_tol);
      return std::move(aug.nodes);
    } catch (const OutsideHullError&) {
      if (attempt > 0) throw;
      pad = 2.0 * pad + 0.05;
    }
  }
}

}  // namespace

FunctionProblem gen_sine(const ExperimentConfig& c) {
  if (c.n_train <= 0) throw ConfigError("sine experiment needs n_train > 0");
  if (c.n_test < 2) throw ConfigError("sine experiment needs n_test >= 2");
  if (c.bounds.size() != 1) throw ConfigError("sine experiment needs one bound");
  const Interval b = c.bounds.front();
  FunctionProblem p;
  Rng rng(c.seed);
  p.train.points.resize(1, c.n_train);
  p.train.values.resize(c.n_train, 1);
  for (int i = 0; i < c.n_train; ++i) {
    const double x = rng.uniform(b.low, b.high);
    p.train.points(0, i) = x;
    p.train.values(i, 0) = sine_function(x);
  }
  p.test = grid_dataset(c.bounds, c.n_test, [](const Point& x) { return sine_function(x(0)); });
  p.nodes = function_nodes(c, p.train);
  return p;
}

FunctionProblem gen_gauss2d(const ExperimentConfig& c) {
  const std::string form = c.gauss_form;
  gauss2d_function(Point::Zero(2), form);  // validates the form
  return grid_problem(c, 2, [form](const Point& x) { return gauss2d_function(x, form); });
}

FunctionProblem gen_rosenbrock(const ExperimentConfig& c) {
  return grid_problem(c, 2, [](const Point& x) { return rosenbrock_function(x); });
}

DynamicsProblem gen_lorenz(const ExperimentConfig& c) {
  if (c.n_train < 2) throw ConfigError("lorenz experiment needs n_train >= 2");
  if (!(c.sample_dt > 0.0)) throw ConfigError("sample_dt must be > 0");
  const double sigma = c.lorenz_sigma, rho = c.lorenz_rho, gamma = c.lorenz_gamma;
  DynamicsProblem p;
  p.field = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lorenz_field(x.head<3>(), sigma, rho, gamma);
  };

  Rng rng(c.seed);
  Point start(3);
  start << rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(10.0, 40.0);
  if (c.lorenz_spinup > 0.0) {
    const Integration spin = integrate(p.field, start, 0.0, c.lorenz_spinup, c.sample_dt);
    start = spin.trajectory.states.bottomRows<1>().transpose();
  }

  p.dt = c.sample_dt;
  p.horizon = c.sample_dt * (c.n_train - 1);
  p.truth = integrate(p.field, start, 0.0, p.horizon, p.dt).trajectory;
  if (p.truth.samples() != c.n_train) throw Error("lorenz truth rollout has an unexpected length");

  p.train.points = p.truth.states.transpose();
  p.train.values.resize(c.n_train, 3);
  for (int i = 0; i < c.n_train; ++i) p.train.values.row(i) = p.field(p.train.points.col(i)).transpose();
  p.nodes = trajectory_nodes(c, p.train.points, p.train.points, p.short_of_candidates);
  return p;
}

DynamicsProblem gen_orbit(const ExperimentConfig& c) {
  const double mu = c.orbit_mu, e = c.orbit_eccentricity, rp = c.orbit_perigee;
  if (!(e >= 0.0 && e < 1.0)) throw ConfigError("orbit eccentricity must lie in [0, 1)");
  if (!(mu > 0.0) || !(rp > 0.0)) throw ConfigError("orbit mu and perigee radius must be > 0");
  if (c.n_train < 1) throw ConfigError("orbit experiment needs n_train >= 1");
  if (c.orbit_steps_per_period < 1 || !(c.orbit_periods > 0.0)) {
    throw ConfigError("orbit needs steps_per_period >= 1 and periods > 0");
  }

  DynamicsProblem p;
  p.angular_momentum = std::sqrt(mu * rp * (1.0 + e));
  const double semi_major = rp / (1.0 - e);
  p.period = 2.0 * std::numbers::pi * std::sqrt(semi_major * semi_major * semi_major / mu);
  const double h0 = p.angular_momentum;
  p.field = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd { return orbit_field(x.head<4>(), mu, e, h0); };

  Point start(4);
  start << rp, 0.0, 0.0, h0 / (rp * rp);  // perigee
  p.dt = p.period / c.orbit_steps_per_period;
  p.horizon = c.orbit_periods * p.period;
  p.truth = integrate(p.field, start, 0.0, p.horizon, p.dt).trajectory;

  // Samples at uniform times over the horizon, snapped to the integration grid.
  const Eigen::Index steps = p.truth.samples() - 1;
  p.train.points.resize(4, c.n_train);
  p.train.values.resize(c.n_train, 4);
  for (int i = 0; i < c.n_train; ++i) {
    const auto k = static_cast<Eigen::Index>(std::llround(static_cast<double>(i) * steps / c.n_train));
    p.train.points.col(i) = p.truth.states.row(k).transpose();
    p.train.values.row(i) = p.field(p.train.points.col(i)).transpose();
  }
  p.nodes = trajectory_nodes(c, p.truth.states.transpose(), p.train.points, p.short_of_candidates);
  return p;
}

// ---------------------------------------------------------------------------
// Reports

std::string report_to_json(const Report& r) {
  json j;
  j["experiment"] = r.experiment;
  j["config"] = r.config_json.empty() ? json::object() : json::parse(r.config_json);
  j["training_rms"] = r.training_rms;
  j["test_rms"] = r.test_rms ? json(*r.test_rms) : json(nullptr);
  j["metrics"] = json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  j["notes"] = json::object();
  for (const auto& [k, v] : r.notes) j["notes"][k] = v;
  j["series"] = json::object();
  for (const auto& [k, v] : r.series) j["series"][k] = v;
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("report is not valid JSON");
  try {
    Report r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config_json = j.at("config").empty() ? std::string() : j.at("config").dump(2);
    r.training_rms = j.at("training_rms").get<double>();
    if (!j.at("test_rms").is_null()) r.test_rms = j.at("test_rms").get<double>();
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = v.get<double>();
    for (const auto& [k, v] : j.at("notes").items()) r.notes[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("series").items()) r.series[k] = v.get<std::vector<double>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Runner

namespace {

Dictionary baseline_dictionary(const ExperimentConfig& c, int dim) {
  return Dictionary::polynomial(dim, c.baseline_degree, c.baseline_trig, {c.baseline_frequency});
}

void add_artifact(ExperimentArtifacts* a, std::string name, std::string text) {
  if (a) a->files.emplace_back(std::move(name), std::move(text));
}

void note_emptied(Report& r, const DictionaryModel& dm) {
  std::string which;
  for (std::size_t j = 0; j < dm.emptied.size(); ++j) {
    if (dm.emptied[j]) which += (which.empty() ? "" : ",") + std::to_string(j + 1);
  }
  if (!which.empty()) r.notes["baseline_warning"] = "every feature thresholded away for output(s) " + which;
}

Report run_function(const ExperimentConfig& c, ExperimentArtifacts* artifacts) {
  FunctionProblem p;
  if (c.name == "sine") {
    p = gen_sine(c);
  } else if (c.name == "gauss2d") {
    p = gen_gauss2d(c);
  } else {
    p = gen_rosenbrock(c);
  }

  Report r;
  const Approximant model = fit(p.nodes, p.train, c.beta, c.alpha, c.solver, c.l1, c.threads);
  r.training_rms = model.report.training_rms;
  r.metrics["n_nodes"] = static_cast<double>(p.nodes.size());
  r.metrics["n_train"] = static_cast<double>(p.train.size());
  r.metrics["basis_iterations"] = static_cast<double>(model.report.basis_iterations);
  r.metrics["fit_objective"] = model.report.objective;
  r.metrics["active_nodes_1e-3"] = static_cast<double>(active_nodes(model, 1e-3).size());

  // With B = D the hull shrinks to the data; test points outside it are skipped.
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < p.test.size(); ++i) {
    if (in_hull(p.nodes, p.test.points.col(i), c.solver.hull_tol).membership != Membership::Outside) {
      inside.push_back(i);
    }
  }
  Dataset test;
  test.points.resize(p.test.dim(), static_cast<Eigen::Index>(inside.size()));
  test.values.resize(static_cast<Eigen::Index>(inside.size()), 1);
  for (std::size_t k = 0; k < inside.size(); ++k) {
    test.points.col(static_cast<Eigen::Index>(k)) = p.test.points.col(inside[k]);
    test.values(static_cast<Eigen::Index>(k), 0) = p.test.values(inside[k], 0);
  }
  r.metrics["n_test"] = static_cast<double>(test.size());
  r.metrics["n_test_outside_hull"] = static_cast<double>(p.test.size() - test.size());

  Eigen::VectorXd pred;
  if (test.size() > 0) {
    pred = predict_many(model, test.points, c.threads);
    r.test_rms = rms(pred - test.values.col(0));
    r.metrics["test_rms"] = *r.test_rms;
  }
  r.metrics["training_rms"] = r.training_rms;

  Eigen::MatrixXd baseline_pred;
  if (c.baseline) {
    const DictionaryModel dm = dict_fit(baseline_dictionary(c, static_cast<int>(p.train.dim())), p.train,
                                        c.baseline_threshold, c.baseline_sweeps);
    note_emptied(r, dm);
    r.metrics["baseline_training_rms"] =
        rms(dict_predict_many(dm, p.train.points).col(0) - p.train.values.col(0));
    r.metrics["baseline_features"] = static_cast<double>(dm.dictionary.size());
    if (test.size() > 0) {
      baseline_pred = dict_predict_many(dm, test.points);
      const double b = rms(baseline_pred.col(0) - test.values.col(0));
      r.metrics["baseline_test_rms"] = b;
      if (*r.test_rms > 0.0) r.metrics["baseline_to_maxent_test_ratio"] = b / *r.test_rms;
    }
  }

  if (artifacts) {
    add_artifact(artifacts, "train.csv", format_csv(dataset_to_csv(p.train, ColumnLayout::Function)));
    CsvTable t;
    t.header = coordinate_header(test.dim());
    t.header.push_back("f_true");
    t.header.push_back("f_pred");
    if (c.baseline) t.header.push_back("f_baseline");
    t.rows.resize(test.size(), static_cast<Eigen::Index>(t.header.size()));
    if (test.size() > 0) {
      t.rows.leftCols(test.dim()) = test.points.transpose();
      t.rows.col(test.dim()) = test.values.col(0);
      t.rows.col(test.dim() + 1) = pred;
      if (c.baseline) t.rows.col(test.dim() + 2) = baseline_pred.col(0);
    }
    add_artifact(artifacts, "test_predictions.csv", format_csv(t));
    add_artifact(artifacts, "model.json", model_to_json(StoredModel::from(model)));
  }
  return r;
}

Trajectory head(const Trajectory& t, Eigen::Index n) {
  return Trajectory{t.times.head(n), t.states.topRows(n)};
}

Report run_dynamics(const ExperimentConfig& c, ExperimentArtifacts* artifacts) {
  const bool orbit = c.name != "lorenz";
  DynamicsProblem p = orbit ? gen_orbit(c) : gen_lorenz(c);
  const Eigen::Index d = p.train.dim();

  Report r;
  if (p.short_of_candidates) r.notes["augmentation"] = "fewer distinct candidates than requested";
  const SurrogateModel model = fit_dynamics(p.nodes, p.train, c.beta, c.alpha, c.solver, c.l1, c.threads);
  double ss = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double v = model.reports[static_cast<std::size_t>(j)].training_rms;
    r.metrics["derivative_rms_" + std::to_string(j + 1)] = v;
    ss += v * v;
  }
  r.training_rms = std::sqrt(ss / static_cast<double>(d));
  r.metrics["training_rms"] = r.training_rms;
  r.metrics["n_nodes"] = static_cast<double>(p.nodes.size());
  r.metrics["n_train"] = static_cast<double>(p.train.size());

  const Point x0 = p.truth.states.row(0).transpose();
  const Integration roll = integrate(model, x0, 0.0, p.horizon, p.dt);
  const Eigen::Index done = roll.trajectory.samples();
  r.notes["rollout_status"] = to_string(roll.status);
  if (!roll.completed()) r.notes["rollout_message"] = roll.message;
  r.metrics["rollout_last_time"] = roll.last_time;
  r.metrics["horizon"] = p.horizon;
  const double rollout_rms = trajectory_rms(head(p.truth, done), roll.trajectory);
  r.test_rms = rollout_rms;
  r.metrics["rollout_rms"] = rollout_rms;

  // Gated window: first rollout_fraction of the horizon (Lorenz) or one period (orbit).
  const double window_end = orbit ? std::min(p.period, p.horizon) : c.rollout_fraction * p.horizon;
  Eigen::Index in_window = 0;
  while (in_window < p.truth.samples() && p.truth.times(in_window) <= window_end + 1e-9 * p.dt) ++in_window;
  r.metrics["window_end"] = window_end;
  if (done >= in_window) {
    r.metrics["rollout_rms_window"] = trajectory_rms(head(p.truth, in_window), head(roll.trajectory, in_window));
  }

  Eigen::VectorXd h_err;
  if (orbit) {
    r.metrics["period"] = p.period;
    r.metrics["angular_momentum"] = p.angular_momentum;
    h_err = angular_momentum_error(roll.trajectory, p.angular_momentum);
    r.metrics["angular_momentum_error_max"] = h_err.maxCoeff();
    const Eigen::Index n_period = std::min(done, in_window);
    r.metrics["angular_momentum_error_max_period"] = h_err.head(n_period).maxCoeff();
    r.series["angular_momentum_error"] = std::vector<double>(h_err.data(), h_err.data() + h_err.size());
  }

  Integration base_roll;
  if (c.baseline) {
    const DictionaryModel dm = dict_fit(baseline_dictionary(c, static_cast<int>(d)), p.train,
                                        c.baseline_threshold, c.baseline_sweeps);
    note_emptied(r, dm);
    const Eigen::MatrixXd fitted = dict_predict_many(dm, p.train.points);
    double bss = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = rms(fitted.col(j) - p.train.values.col(j));
      bss += v * v;
    }
    r.metrics["baseline_training_rms"] = std::sqrt(bss / static_cast<double>(d));
    base_roll = integrate([&dm](const Eigen::VectorXd& x) { return dict_predict(dm, x); }, x0, 0.0,
                          p.horizon, p.dt);
    r.notes["baseline_rollout_status"] = to_string(base_roll.status);
    const Eigen::Index bdone = base_roll.trajectory.samples();
    r.metrics["baseline_rollout_rms"] = trajectory_rms(head(p.truth, bdone), base_roll.trajectory);

    const double dev_end = orbit ? c.orbit_baseline_window * p.period : window_end;
    const double dev_model = max_deviation(p.truth, roll.trajectory, dev_end);
    const double dev_base = max_deviation(p.truth, base_roll.trajectory, dev_end);
    r.metrics["deviation_window_end"] = dev_end;
    r.metrics["maxent_deviation_window"] = dev_model;
    r.metrics["baseline_deviation_window"] = dev_base;
    if (dev_model > 0.0) r.metrics["baseline_to_maxent_deviation_ratio"] = dev_base / dev_model;
    if (orbit && base_roll.trajectory.states.col(0).minCoeff() > 0.0) {
      const Eigen::VectorXd bh = angular_momentum_error(base_roll.trajectory, p.angular_momentum);
      r.metrics["baseline_angular_momentum_error_max"] = bh.maxCoeff();
    }
  }

  if (artifacts) {
    add_artifact(artifacts, "train.csv", format_csv(dataset_to_csv(p.train, ColumnLayout::Dynamics)));
    add_artifact(artifacts, "trajectory_true.csv", format_csv(trajectory_to_csv(p.truth)));
    add_artifact(artifacts, "trajectory_model.csv", format_csv(trajectory_to_csv(roll.trajectory)));
    if (c.baseline) {
      add_artifact(artifacts, "trajectory_baseline.csv", format_csv(trajectory_to_csv(base_roll.trajectory)));
    }
    if (orbit) {
      CsvTable t;
      t.header = {"t", "maxent"};
      t.rows.resize(h_err.size(), 2);
      t.rows.col(0) = roll.trajectory.times;
      t.rows.col(1) = h_err;
      add_artifact(artifacts, "angular_momentum.csv", format_csv(t));
    }
    add_artifact(artifacts, "model.json", model_to_json(StoredModel::from(model)));
  }
  return r;
}

}  // namespace

Report run_experiment(const ExperimentConfig& config, ExperimentArtifacts* artifacts) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), config.name) == names.end()) {
    throw ConfigError("unknown experiment '" + config.name + "'");
  }
  const auto start = std::chrono::steady_clock::now();
  const bool dynamics = config.name == "lorenz" || config.name.starts_with("orbit");
  Report r = dynamics ? run_dynamics(config, artifacts) : run_function(config, artifacts);
  r.experiment = config.name;
  r.config_json = experiment_config_to_json(config);
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Report run_experiment(const std::string& name, const std::vector<std::string>& overrides,
                      ExperimentArtifacts* artifacts) {
  return run_experiment(apply_overrides(default_experiment_config(name), overrides), artifacts);
}

void write_artifacts(const std::string& directory, const Report& report,
                     const ExperimentArtifacts& artifacts) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  write_text_file((dir / "report.json").string(), report_to_json(report));
  for (const auto& [name, text] : artifacts.files) write_text_file((dir / name).string(), text);
}

}  // namespace maxent
