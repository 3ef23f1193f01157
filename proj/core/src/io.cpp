#include "maxent/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "config_util.hpp"

namespace maxent {

using detail::json;

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto fields = split(line);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw ParseError(source + ":" + std::to_string(line_no) + ": empty column name", line_no);
        table.header.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      double v = 0.0;
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError(source + ":" + std::to_string(line_no) + ": '" + std::string(f) +
                             "' is not a finite number",
                         line_no);
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(source + ": file is empty");

  table.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      table.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out += ',';
    out += table.header[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.rows.cols(); ++j) {
      if (j) out += ',';
      out += format_number(table.rows(i, j));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> coordinate_header(Eigen::Index d, const std::string& prefix) {
  std::vector<std::string> h;
  for (Eigen::Index k = 1; k <= d; ++k) h.push_back(prefix + std::to_string(k));
  return h;
}

CsvDataset dataset_from_csv(const CsvTable& table) {
  const auto& h = table.header;
  Eigen::Index d = 0;
  while (d < static_cast<Eigen::Index>(h.size()) && h[static_cast<std::size_t>(d)] == "x" + std::to_string(d + 1)) ++d;
  if (d == 0) throw ParseError("header must start with x1 (got '" + (h.empty() ? "" : h[0]) + "')", 1);

  CsvDataset out;
  const auto extra = static_cast<Eigen::Index>(h.size()) - d;
  if (extra == 0) {
    out.layout = ColumnLayout::PointsOnly;
  } else if (extra == 1 && h[static_cast<std::size_t>(d)] == "f") {
    out.layout = ColumnLayout::Function;
  } else if (extra == d) {
    for (Eigen::Index k = 0; k < d; ++k) {
      if (h[static_cast<std::size_t>(d + k)] != "dx" + std::to_string(k + 1)) {
        throw ParseError("expected column dx" + std::to_string(k + 1) + ", got '" +
                             h[static_cast<std::size_t>(d + k)] + "'",
                         1);
      }
    }
    out.layout = ColumnLayout::Dynamics;
  } else {
    throw ParseError("header must be x1..xd optionally followed by f or dx1..dxd", 1);
  }
  if (table.rows.rows() == 0) throw ParseError("no data rows", 1);
  out.data.points = table.rows.leftCols(d).transpose();
  out.data.values = table.rows.rightCols(extra);
  return out;
}

CsvTable dataset_to_csv(const Dataset& data, ColumnLayout layout) {
  CsvTable t;
  t.header = coordinate_header(data.dim());
  Eigen::Index extra = 0;
  if (layout == ColumnLayout::Function) {
    t.header.push_back("f");
    extra = 1;
  } else if (layout == ColumnLayout::Dynamics) {
    for (const auto& c : coordinate_header(data.dim(), "dx")) t.header.push_back(c);
    extra = data.dim();
  }
  if (extra > 0 && data.values.cols() != extra) throw DimensionError("dataset does not match column layout");
  t.rows.resize(data.size(), data.dim() + extra);
  t.rows.leftCols(data.dim()) = data.points.transpose();
  if (extra > 0) t.rows.rightCols(extra) = data.values;
  return t;
}

CsvTable trajectory_to_csv(const Trajectory& traj) {
  CsvTable t;
  t.header.push_back("t");
  for (const auto& c : coordinate_header(traj.states.cols())) t.header.push_back(c);
  t.rows.resize(traj.samples(), 1 + traj.states.cols());
  t.rows.col(0) = traj.times;
  t.rows.rightCols(traj.states.cols()) = traj.states;
  return t;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr const char* kModelFormat = "maxent-model";
constexpr int kModelVersion = 1;

json solver_to_json(const SolverOptions& s) {
  return json{{"tol", s.tol},
              {"max_iter", s.max_iter},
              {"hessian_ridge", s.hessian_ridge},
              {"line_search_shrink", s.line_search_shrink},
              {"hull_tol", s.hull_tol}};
}

SolverOptions solver_from_json(const json& j) {
  SolverOptions s;
  s.tol = j.at("tol").get<double>();
  s.max_iter = j.at("max_iter").get<int>();
  s.hessian_ridge = j.at("hessian_ridge").get<double>();
  s.line_search_shrink = j.at("line_search_shrink").get<double>();
  s.hull_tol = j.at("hull_tol").get<double>();
  s.validate();
  return s;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) throw ParseError(std::string(what) + " must be a non-empty list of rows");
  const auto cols = rows[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols) throw ParseError(std::string(what) + " is not rectangular");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

StoredModel StoredModel::from(const Approximant& a) {
  StoredModel m;
  m.kind = Kind::Function;
  m.nodes = a.nodes;
  m.beta = a.beta;
  m.alpha = a.alpha;
  m.solver = a.solver;
  m.coefficients = a.coefficients;
  m.reports = {a.report};
  return m;
}

StoredModel StoredModel::from(const SurrogateModel& s) {
  StoredModel m;
  m.kind = Kind::Dynamics;
  m.nodes = s.nodes;
  m.beta = s.beta;
  m.alpha = s.alpha;
  m.solver = s.solver;
  m.coefficients = s.coefficients;
  m.reports = s.reports;
  return m;
}

Approximant StoredModel::approximant() const {
  if (coefficients.cols() != 1) throw DimensionError("model has more than one output column");
  Approximant a;
  a.nodes = nodes;
  a.beta = beta;
  a.alpha = alpha;
  a.solver = solver;
  a.coefficients = coefficients.col(0);
  if (!reports.empty()) a.report = reports.front();
  return a;
}

SurrogateModel StoredModel::surrogate() const {
  if (coefficients.cols() != nodes.dim()) {
    throw DimensionError("model output count does not match the state dimension");
  }
  SurrogateModel s;
  s.nodes = nodes;
  s.beta = beta;
  s.alpha = alpha;
  s.solver = solver;
  s.coefficients = coefficients;
  s.reports = reports;
  return s;
}

std::string model_to_json(const StoredModel& model) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = model.kind == StoredModel::Kind::Function ? "function" : "dynamics";
  j["dimension"] = model.nodes.dim();
  j["beta"] = model.beta;
  j["alpha"] = model.alpha;
  j["solver"] = solver_to_json(model.solver);
  j["nodes"] = matrix_rows(model.nodes.coords().transpose());
  j["coefficients"] = matrix_rows(model.coefficients);
  json reports = json::array();
  for (const auto& r : model.reports) {
    reports.push_back({{"training_rms", r.training_rms},
                       {"objective", r.objective},
                       {"solver_iterations", r.solver_iterations},
                       {"basis_iterations", r.basis_iterations}});
  }
  j["fit_report"] = reports;
  return j.dump(2) + "\n";
}

StoredModel model_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("model file is not valid JSON");
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw ParseError("not a maxent model file");
    if (j.at("version").get<int>() != kModelVersion) throw ParseError("unsupported model file version");
    StoredModel m;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "function") {
      m.kind = StoredModel::Kind::Function;
    } else if (kind == "dynamics") {
      m.kind = StoredModel::Kind::Dynamics;
    } else {
      throw ParseError("unknown model kind '" + kind + "'");
    }
    m.beta = j.at("beta").get<double>();
    m.alpha = j.at("alpha").get<double>();
    m.solver = solver_from_json(j.at("solver"));
    m.nodes = NodeSet(matrix_from_rows(j.at("nodes"), "nodes").transpose());
    if (m.nodes.dim() != j.at("dimension").get<Eigen::Index>()) throw ParseError("node dimension mismatch");
    m.coefficients = matrix_from_rows(j.at("coefficients"), "coefficients");
    if (m.coefficients.rows() != m.nodes.size()) {
      throw ParseError("coefficient rows do not match the node count");
    }
    for (const auto& r : j.at("fit_report")) {
      FitReport fr;
      fr.training_rms = r.at("training_rms").get<double>();
      fr.objective = r.at("objective").get<double>();
      fr.solver_iterations = r.at("solver_iterations").get<int>();
      fr.basis_iterations = r.at("basis_iterations").get<long>();
      m.reports.push_back(fr);
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::string& path, const StoredModel& model) {
  write_text_file(path, model_to_json(model));
}

StoredModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Run configuration

namespace {

json run_config_nested(const RunConfig& c) {
  json j;
  j["beta"] = c.beta;
  j["alpha"] = c.alpha;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["nodes"] = {{"counts", c.node_counts},
                {"bounds", detail::bounds_to_json(c.node_bounds)},
                {"pad", c.node_pad},
                {"augment", c.node_augment},
                {"from_data", c.nodes_from_data}};
  j["solver"] = solver_to_json(c.solver);
  j["l1"] = {{"max_iter", c.l1.max_iter}, {"tol", c.l1.tol}};
  return j;
}

RunConfig run_config_from_flat(const json& f) {
  RunConfig c;
  c.beta = f.at("beta").get<double>();
  c.alpha = f.at("alpha").get<double>();
  c.seed = f.at("seed").get<std::uint64_t>();
  c.threads = f.at("threads").get<int>();
  c.node_counts = f.at("nodes.counts").get<std::vector<int>>();
  c.node_bounds = detail::bounds_from_json(f.at("nodes.bounds"));
  c.node_pad = f.at("nodes.pad").get<double>();
  c.node_augment = f.at("nodes.augment").get<int>();
  c.nodes_from_data = f.at("nodes.from_data").get<bool>();
  c.solver.tol = f.at("solver.tol").get<double>();
  c.solver.max_iter = f.at("solver.max_iter").get<int>();
  c.solver.hessian_ridge = f.at("solver.hessian_ridge").get<double>();
  c.solver.line_search_shrink = f.at("solver.line_search_shrink").get<double>();
  c.solver.hull_tol = f.at("solver.hull_tol").get<double>();
  c.l1.max_iter = f.at("l1.max_iter").get<int>();
  c.l1.tol = f.at("l1.tol").get<double>();

  c.solver.validate();
  if (!(c.beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(c.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.node_counts.empty()) throw ConfigError("nodes.counts must not be empty");
  if (!(c.node_pad >= 0.0)) throw ConfigError("nodes.pad must be >= 0");
  if (c.node_augment < 0) throw ConfigError("nodes.augment must be >= 0");
  if (c.l1.max_iter < 1 || !(c.l1.tol > 0.0)) throw ConfigError("invalid l1 settings");
  return c;
}

}  // namespace

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  const json flat = detail::flatten(run_config_nested(RunConfig{}));
  for (const auto& [k, v] : flat.items()) keys.push_back(k);
  return keys;
}

std::string env_var_for(const std::string& key) {
  std::string name = "MAXENT_";
  for (char ch : key) name += (ch == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

RunConfig run_config_from_json(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");
  json flat = detail::flatten(run_config_nested(RunConfig{}));
  detail::merge_checked(flat, detail::flatten(j), "config");
  return run_config_from_flat(flat);
}

RunConfig load_run_config(const std::optional<std::string>& path,
                          const std::vector<std::string>& overrides, bool use_env) {
  json flat = detail::flatten(run_config_nested(RunConfig{}));
  if (path) {
    const json j = json::parse(read_text_file(*path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError(*path + ": config is not a JSON object");
    detail::merge_checked(flat, detail::flatten(j), *path);
  }
  if (use_env) {
    json env = json::object();
    for (const auto& [key, value] : flat.items()) {
      if (const char* raw = std::getenv(env_var_for(key).c_str())) {
        json v = json::parse(raw, nullptr, false);
        env[key] = v.is_discarded() ? json(raw) : v;
      }
    }
    detail::merge_checked(flat, env, "environment");
  }
  json cli = json::object();
  for (const auto& o : overrides) {
    auto [k, v] = detail::parse_override(o);
    cli[k] = v;
  }
  detail::merge_checked(flat, cli, "--set");
  return run_config_from_flat(flat);
}

std::string run_config_to_json(const RunConfig& config) {
  return run_config_nested(config).dump(2) + "\n";
}

NodeSet build_nodes(const RunConfig& config, const Dataset& data) {
  if (data.size() == 0) throw DomainError("cannot build nodes for an empty dataset");
  if (config.nodes_from_data) return NodeSet(data.points);

  const auto d = static_cast<std::size_t>(data.dim());
  const std::vector<Interval> bounds =
      config.node_bounds.empty() ? bounding_box(data.points, config.node_pad) : config.node_bounds;
  if (bounds.size() != d) throw ConfigError("nodes.bounds has the wrong number of axes");
  std::vector<int> counts = config.node_counts;
  if (counts.size() == 1) counts.assign(d, counts.front());
  if (counts.size() != d) throw ConfigError("nodes.counts has the wrong number of axes");

  const NodeSet grid = grid_nodes(bounds, counts);
  if (config.node_augment == 0) return grid;
  return augment_nodes(grid, data.points, static_cast<std::size_t>(config.node_augment), config.seed).nodes;
}

}  // namespace maxent
