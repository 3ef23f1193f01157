#include "maxent_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxent/approximator.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/errors.hpp"
#include "maxent/experiments.hpp"
#include "maxent/io.hpp"

#ifndef MAXENT_VERSION
#define MAXENT_VERSION "0.0.0"
#endif

namespace maxent::cli {
namespace {

constexpr int kModelFormatVersion = 1;

std::string row_list(const std::vector<std::size_t>& indices) {
  std::ostringstream s;
  const std::size_t shown = std::min<std::size_t>(indices.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) s << (i ? ", " : "") << indices[i] + 1;
  if (shown < indices.size()) s << ", ... (" << indices.size() << " total)";
  return s.str();
}

// Outside-hull failures name 1-based data rows (the header is not counted).
int outside_hull(std::ostream& err, const std::string& file, const OutsideHullError& e) {
  err << "error: " << file << ": ";
  if (e.indices().empty()) {
    err << e.what() << "\n";
  } else {
    err << e.indices().size() << " point(s) outside the node hull at data row(s) "
        << row_list(e.indices()) << "\n";
  }
  return kOutsideHull;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) throw ConfigError("cannot parse '" + item + "' as a number");
    v.push_back(x);
  }
  if (v.empty()) throw ConfigError("empty number list");
  return v;
}

// MAXENT_<KEY> variables for the experiment configuration, as overrides.
std::vector<std::string> experiment_env_overrides(const ExperimentConfig& defaults) {
  std::vector<std::string> out;
  using nlohmann::ordered_json;
  std::vector<std::string> keys;
  const auto walk = [&](auto&& self, const ordered_json& node, const std::string& prefix) -> void {
    for (const auto& [k, v] : node.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object()) {
        self(self, v, key);
      } else {
        keys.push_back(key);
      }
    }
  };
  walk(walk, ordered_json::parse(experiment_config_to_json(defaults)), "");
  for (const auto& key : keys) {
    if (key == "name") continue;
    if (const char* v = std::getenv(env_var_for(key).c_str())) out.push_back(key + "=" + v);
  }
  return out;
}

struct FitArgs {
  std::string data, out;
  std::optional<std::string> config;
  std::vector<std::string> sets;
  bool print_config = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_run_config(a.config, a.sets);
  if (a.print_config) {
    out << run_config_to_json(cfg) << "\n";
    return kOk;
  }
  if (a.data.empty() || a.out.empty()) {
    err << "error: fit needs --data and --out\n";
    return kBadInput;
  }
  const CsvDataset csv = dataset_from_csv(read_csv(a.data));
  if (csv.layout == ColumnLayout::PointsOnly) {
    err << "error: " << a.data << ": no value columns (expected f or dx1..dxd)\n";
    return kBadInput;
  }
  const NodeSet nodes = build_nodes(cfg, csv.data);
  try {
    StoredModel stored;
    if (csv.layout == ColumnLayout::Function) {
      stored = StoredModel::from(fit(nodes, csv.data, cfg.beta, cfg.alpha, cfg.solver, cfg.l1, cfg.threads));
    } else {
      stored = StoredModel::from(
          fit_dynamics(nodes, csv.data, cfg.beta, cfg.alpha, cfg.solver, cfg.l1, cfg.threads));
    }
    save_model(a.out, stored);
    out << "nodes " << nodes.size() << ", samples " << csv.data.size() << "\n";
    for (std::size_t j = 0; j < stored.reports.size(); ++j) {
      out << "component " << j + 1 << ": training_rms " << format_number(stored.reports[j].training_rms)
          << ", objective " << format_number(stored.reports[j].objective) << "\n";
    }
  } catch (const OutsideHullError& e) {
    return outside_hull(err, a.data, e);
  } catch (const FitError& e) {
    err << "error: " << a.data << ": " << e.what();
    if (!e.failed_points().empty()) err << " (data row(s) " << row_list(e.failed_points()) << ")";
    err << "\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& points_path, const std::string& out_path,
             std::ostream& out, std::ostream& err) {
  const StoredModel model = load_model(model_path);
  const CsvDataset csv = dataset_from_csv(read_csv(points_path));
  const Eigen::MatrixXd& pts = csv.data.points;
  if (pts.rows() != model.nodes.dim()) {
    err << "error: " << points_path << ": points have " << pts.rows() << " coordinates, model expects "
        << model.nodes.dim() << "\n";
    return kBadInput;
  }
  BasisMatrix basis;
  try {
    basis = basis_matrix(model.nodes, pts, model.beta, model.solver);
  } catch (const OutsideHullError& e) {
    return outside_hull(err, points_path, e);
  }
  const auto failed = basis.failed_rows();
  if (!failed.empty()) {
    err << "warning: basis solver did not converge at data row(s) " << row_list(failed) << "\n";
  }
  const Eigen::MatrixXd pred = basis.values * model.coefficients;

  CsvTable t;
  t.header = coordinate_header(pts.rows());
  if (model.kind == StoredModel::Kind::Function) {
    t.header.push_back("f");
  } else {
    const auto dx = coordinate_header(pts.rows(), "dx");
    t.header.insert(t.header.end(), dx.begin(), dx.end());
  }
  t.rows.resize(pts.cols(), static_cast<Eigen::Index>(t.header.size()));
  t.rows.leftCols(pts.rows()) = pts.transpose();
  t.rows.rightCols(pred.cols()) = pred;
  write_text_file(out_path, format_csv(t));
  out << "evaluated " << pts.cols() << " point(s)\n";
  return kOk;
}

struct SimulateArgs {
  std::string model, x0, out;
  double t0 = 0.0, t1 = 0.0, dt = 0.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.dt > 0.0)) {
    err << "error: --dt must be > 0\n";
    return kBadInput;
  }
  if (!(a.t1 > a.t0)) {
    err << "error: --t1 must exceed --t0\n";
    return kBadInput;
  }
  const StoredModel stored = load_model(a.model);
  if (stored.kind != StoredModel::Kind::Dynamics) {
    err << "error: " << a.model << ": simulate needs a dynamics model\n";
    return kBadInput;
  }
  const SurrogateModel model = stored.surrogate();
  const std::vector<double> x0v = parse_list(a.x0);
  if (static_cast<Eigen::Index>(x0v.size()) != model.nodes.dim()) {
    err << "error: --x0 has " << x0v.size() << " entries, model state has " << model.nodes.dim() << "\n";
    return kBadInput;
  }
  const Point x0 = Eigen::Map<const Eigen::VectorXd>(x0v.data(), static_cast<Eigen::Index>(x0v.size()));
  Integration run;
  try {
    run = integrate(model, x0, a.t0, a.t1, a.dt);
  } catch (const OutsideHullError&) {
    err << "error: --x0 lies outside the node hull\n";
    return kOutsideHull;
  }
  write_text_file(a.out, format_csv(trajectory_to_csv(run.trajectory)));
  switch (run.status) {
    case IntegrationStatus::Completed:
      out << "integrated " << run.trajectory.samples() << " samples to t = " << format_number(run.last_time)
          << "\n";
      return kOk;
    case IntegrationStatus::DomainExit:
      err << "error: trajectory left the node hull; last valid time " << format_number(run.last_time)
          << " (partial trajectory written to " << a.out << ")\n";
      return kDomainExit;
    case IntegrationStatus::NumericalBlowup:
      err << "error: numerical blowup; last valid time " << format_number(run.last_time) << "\n";
      return kBlowup;
  }
  return kUnexpected;
}

struct BenchArgs {
  std::string experiment, out;
  std::optional<std::string> config;
  std::vector<std::string> sets;
  bool baseline = false;
  bool print_config = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream&) {
  ExperimentConfig cfg;
  if (a.config) {
    cfg = experiment_config_from_json(read_text_file(*a.config));
    if (!a.experiment.empty() && a.experiment != cfg.name) {
      throw ConfigError("--experiment '" + a.experiment + "' disagrees with the config name '" + cfg.name + "'");
    }
  } else if (!a.experiment.empty()) {
    cfg = default_experiment_config(a.experiment);
  } else {
    throw ConfigError("bench needs --experiment or --config");
  }
  std::vector<std::string> overrides = experiment_env_overrides(cfg);
  if (a.baseline) overrides.emplace_back("baseline=true");
  overrides.insert(overrides.end(), a.sets.begin(), a.sets.end());
  cfg = apply_overrides(cfg, overrides);
  if (a.print_config) {
    out << experiment_config_to_json(cfg) << "\n";
    return kOk;
  }

  ExperimentArtifacts artifacts;
  const Report r = run_experiment(cfg, &artifacts);
  const std::string dir = a.out.empty() ? "bench_" + cfg.name : a.out;
  write_artifacts(dir, r, artifacts);

  const auto metric = [&r](const std::string& k) {
    const auto it = r.metrics.find(k);
    return it == r.metrics.end() ? std::string("-") : format_number(it->second);
  };
  out << std::left << std::setw(14) << "experiment" << std::setw(24) << "training_rms" << std::setw(24)
      << "test_rms";
  if (cfg.baseline) out << std::setw(24) << "baseline_test_rms";
  out << "runtime_s\n";
  out << std::setw(14) << r.experiment << std::setw(24) << format_number(r.training_rms) << std::setw(24)
      << (r.test_rms ? format_number(*r.test_rms) : "-");
  if (cfg.baseline) {
    const bool dyn = r.metrics.contains("baseline_rollout_rms");
    out << std::setw(24) << metric(dyn ? "baseline_rollout_rms" : "baseline_test_rms");
  }
  std::ostringstream rt;
  rt << std::fixed << std::setprecision(3) << r.runtime_seconds;
  out << rt.str() << "\n";
  out << "artifacts written to " << dir << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local maximum-entropy approximants and dynamics surrogates"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print the program and model-format versions");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an approximant (x1..xd,f) or vector field (x1..xd,dx1..dxd)");
  fit_cmd->add_option("--data", fa.data, "Training CSV");
  fit_cmd->add_option("--config", fa.config, "JSON run configuration");
  fit_cmd->add_option("--out", fa.out, "Model file to write");
  fit_cmd->add_option("--set", fa.sets, "Override a config key (key=value); repeatable");
  fit_cmd->add_flag("--print-config", fa.print_config, "Print the effective configuration and exit");

  std::string model_path, points_path, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model at the points of a CSV file");
  eval_cmd->add_option("--model", model_path, "Model file")->required();
  eval_cmd->add_option("--points", points_path, "CSV with columns x1..xd")->required();
  eval_cmd->add_option("--out", eval_out, "Output CSV")->required();

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Integrate a dynamics surrogate with RK4");
  sim_cmd->add_option("--model", sa.model, "Dynamics model file")->required();
  sim_cmd->add_option("--x0", sa.x0, "Initial state, comma separated")->required();
  sim_cmd->add_option("--t0", sa.t0, "Start time")->capture_default_str();
  sim_cmd->add_option("--t1", sa.t1, "End time")->required();
  sim_cmd->add_option("--dt", sa.dt, "Step size")->required();
  sim_cmd->add_option("--out", sa.out, "Trajectory CSV (t,x1..xd)")->required();

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Run a reference experiment and write its artifacts");
  bench_cmd->add_option("--experiment", ba.experiment, "sine, gauss2d, rosenbrock, lorenz, orbit, orbit-sparse");
  bench_cmd->add_option("--config", ba.config, "Experiment configuration (as printed by --print-config)");
  bench_cmd->add_flag("--baseline", ba.baseline, "Also fit the dictionary-regression baseline");
  bench_cmd->add_option("--set", ba.sets, "Override a config key (key=value); repeatable");
  bench_cmd->add_option("--out", ba.out, "Artifact directory (default bench_<experiment>)");
  bench_cmd->add_flag("--print-config", ba.print_config, "Print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (version) {
      out << "maxent " << MAXENT_VERSION << " (model format " << kModelFormatVersion << ")\n";
      return kOk;
    }
    if (*fit_cmd) return cmd_fit(fa, out, err);
    if (*eval_cmd) return cmd_eval(model_path, points_path, eval_out, out, err);
    if (*sim_cmd) return cmd_simulate(sa, out, err);
    if (*bench_cmd) return cmd_bench(ba, out, err);
    out << app.help();
    return kBadInput;
  } catch (const OutsideHullError& e) {
    err << "error: " << e.what() << "\n";
    return kOutsideHull;
  } catch (const FitError& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const ConfigError& e) {  // ParseError included
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUnexpected;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("maxent");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace maxent::cli
