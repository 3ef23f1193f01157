#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "maxent/approximator.hpp"
#include "maxent/basis.hpp"
#include "maxent/dynamics.hpp"
#include "maxent/errors.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

/// Malformed input file.  `line()` is 1-based (0 when not tied to a line).
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : ConfigError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// CSV: one header row, comma separated, '.' decimal point, no quoting.

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;  // one row per data line
};

CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");
CsvTable read_csv(const std::string& path);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double v);
std::string format_csv(const CsvTable& table);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

enum class ColumnLayout {
  PointsOnly,  // x1..xd
  Function,    // x1..xd,f
  Dynamics,    // x1..xd,dx1..dxd
};

struct CsvDataset {
  Dataset data;
  ColumnLayout layout = ColumnLayout::PointsOnly;
};

/// Interprets a table by its header; throws ParseError on anything else.
CsvDataset dataset_from_csv(const CsvTable& table);
CsvTable dataset_to_csv(const Dataset& data, ColumnLayout layout);

std::vector<std::string> coordinate_header(Eigen::Index d, const std::string& prefix = "x");

CsvTable trajectory_to_csv(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Model file (JSON): nodes, beta, alpha, solver settings, coefficient matrix
// (n_B x m, m = 1 for a scalar approximant, m = d for a vector field) and
// the fit reports.

struct StoredModel {
  enum class Kind { Function, Dynamics };
  Kind kind = Kind::Function;
  NodeSet nodes;
  double beta = 0.0;
  double alpha = 0.0;
  SolverOptions solver;
  Eigen::MatrixXd coefficients;
  std::vector<FitReport> reports;

  static StoredModel from(const Approximant& a);
  static StoredModel from(const SurrogateModel& s);
  Approximant approximant() const;
  SurrogateModel surrogate() const;
};

std::string model_to_json(const StoredModel& model);
StoredModel model_from_json(const std::string& text);
void save_model(const std::string& path, const StoredModel& model);
StoredModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Run configuration for `fit`.

struct RunConfig {
  double beta = 10.0;
  double alpha = 0.0;
  std::uint64_t seed = 1;
  int threads = 1;

  std::vector<int> node_counts{5};      // per axis; one entry is broadcast
  std::vector<Interval> node_bounds;    // empty: bounding box of the data
  double node_pad = 0.0;                // fraction of the data extent
  int node_augment = 0;                 // data points appended as nodes
  bool nodes_from_data = false;         // B = D

  SolverOptions solver;
  L1Options l1;
};

/// Keys accepted in config files, `--set` overrides and environment variables.
std::vector<std::string> run_config_keys();

/// Environment variable that overrides `key`, e.g. solver.tol -> MAXENT_SOLVER_TOL.
std::string env_var_for(const std::string& key);

/// Defaults, then the JSON config file, then MAXENT_* environment variables,
/// then "key=value" overrides.  Unknown keys raise ConfigError.
RunConfig load_run_config(const std::optional<std::string>& path,
                          const std::vector<std::string>& overrides = {}, bool use_env = true);

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

/// Node set described by the configuration for a given training set.
NodeSet build_nodes(const RunConfig& config, const Dataset& data);

}  // namespace maxent
