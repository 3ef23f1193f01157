#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "maxent/approximator.hpp"
#include "maxent/basis.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

/// Every knob of the reference experiments.  Field names double as the
/// `--set key=value` keys (see experiment_config_keys()).
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 1;
  int threads = 1;

  int nodes_per_axis = 10;
  int n_train = 20;  // samples (sine, dynamics) or points per axis (2-D grids)
  int n_test = 50;   // samples (sine) or points per axis (2-D grids)
  double beta = 100.0;
  double alpha = 0.0;
  std::vector<Interval> bounds{{0.0, 1.0}};
  bool nodes_from_data = false;  // B = D
  std::string gauss_form = "heading";  // "heading": 2 x1 exp(-4|x|^2); "caption": x1 exp(-|x|^2)

  // Dynamics cases.
  double sample_dt = 0.01;
  double node_pad = 0.1;
  int n_augment = 0;
  std::uint64_t augment_seed = 7;
  double rollout_fraction = 0.2;  // gated share of the horizon (Lorenz)

  double lorenz_sigma = 10.0;
  double lorenz_rho = 28.0;
  double lorenz_gamma = 8.0 / 3.0;
  double lorenz_spinup = 10.0;

  double orbit_mu = 1.0;
  double orbit_eccentricity = 0.2;
  double orbit_perigee = 1.1;
  double orbit_periods = 2.0;
  int orbit_steps_per_period = 1000;
  double orbit_baseline_window = 0.1;  // fraction of the period

  bool baseline = false;
  int baseline_degree = 4;
  bool baseline_trig = true;
  double baseline_frequency = 1.0;
  double baseline_threshold = 0.05;
  int baseline_sweeps = 10;

  SolverOptions solver;
  L1Options l1;
};

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

/// Defaults for a named experiment; throws ConfigError for unknown names.
ExperimentConfig default_experiment_config(const std::string& name);

/// Applies "key=value" overrides (values parsed as JSON, falling back to a
/// bare string).  Unknown keys raise ConfigError.
ExperimentConfig apply_overrides(ExperimentConfig config,
                                 const std::vector<std::string>& overrides);

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);

struct FunctionProblem {
  Dataset train;
  Dataset test;
  NodeSet nodes;
};

struct DynamicsProblem {
  Dataset train;             // states and exact derivatives
  Trajectory truth;          // reference rollout on the integration grid
  NodeSet nodes;
  VectorField field;         // true right-hand side
  double dt = 0.0;           // integration step
  double horizon = 0.0;      // end time of the truth rollout
  double period = 0.0;       // orbital period (orbit only)
  double angular_momentum = 0.0;  // h0 (orbit only)
  bool short_of_candidates = false;
};

double sine_function(double x);
double gauss2d_function(const Point& x, const std::string& form = "heading");
double rosenbrock_function(const Point& x);
Eigen::Vector3d lorenz_field(const Eigen::Vector3d& x, double sigma, double rho, double gamma);

/// Orbit state (r, r_dot, theta, theta_dot) derivative.
Eigen::Vector4d orbit_field(const Eigen::Vector4d& x, double mu, double eccentricity, double h0);

FunctionProblem gen_sine(const ExperimentConfig& config);
FunctionProblem gen_gauss2d(const ExperimentConfig& config);
FunctionProblem gen_rosenbrock(const ExperimentConfig& config);
DynamicsProblem gen_lorenz(const ExperimentConfig& config);
DynamicsProblem gen_orbit(const ExperimentConfig& config);

/// Outcome of one experiment.  Every number in `metrics` can be recomputed
/// from the emitted CSV artifacts.
struct Report {
  std::string experiment;
  std::string config_json;
  double training_rms = 0.0;
  std::optional<double> test_rms;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> notes;
  std::map<std::string, std::vector<double>> series;
  double runtime_seconds = 0.0;  // not serialized: reports stay byte-identical per config
};

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);

/// Generated data, fitted models and rollouts of one run, for artifact output.
struct ExperimentArtifacts {
  std::vector<std::pair<std::string, std::string>> files;  // file name -> CSV/JSON text
};

/// generate -> fit -> predict/integrate -> report.  When `artifacts` is not
/// null it receives the CSV/JSON bundle.
Report run_experiment(const ExperimentConfig& config, ExperimentArtifacts* artifacts = nullptr);

Report run_experiment(const std::string& name, const std::vector<std::string>& overrides = {},
                      ExperimentArtifacts* artifacts = nullptr);

/// Writes the artifact bundle (report.json included) into `directory`.
void write_artifacts(const std::string& directory, const Report& report,
                     const ExperimentArtifacts& artifacts);

}  // namespace maxent
