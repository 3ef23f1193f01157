#include "maxent/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maxent/errors.hpp"

namespace maxent {

Approximant SurrogateModel::component(Eigen::Index j) const {
  if (j < 0 || j >= dim()) throw DimensionError("surrogate component out of range");
  Approximant a;
  a.nodes = nodes;
  a.beta = beta;
  a.alpha = alpha;
  a.solver = solver;
  a.coefficients = coefficients.col(j);
  if (static_cast<std::size_t>(j) < reports.size()) a.report = reports[static_cast<std::size_t>(j)];
  return a;
}

SurrogateModel fit_dynamics(const NodeSet& nodes, const Dataset& data, double beta, double alpha,
                            const SolverOptions& solver, const L1Options& l1, int threads) {
  data.validate();
  if (data.size() == 0) throw DomainError("cannot fit dynamics from an empty dataset");
  if (data.dim() != nodes.dim()) throw DimensionError("data and node dimensions differ");
  if (data.outputs() != data.dim()) {
    throw DimensionError("dynamics data needs one derivative column per state component");
  }

  // One basis evaluation per sample, shared by every component.
  const BasisMatrix basis = basis_matrix(nodes, data.points, beta, solver, threads);

  SurrogateModel model;
  model.nodes = nodes;
  model.beta = beta;
  model.alpha = alpha;
  model.solver = solver;
  model.coefficients.resize(nodes.size(), data.outputs());
  for (Eigen::Index j = 0; j < data.outputs(); ++j) {
    try {
      Approximant a = fit_on_basis(nodes, basis, data.values.col(j), beta, alpha, solver, l1);
      model.coefficients.col(j) = a.coefficients;
      model.reports.push_back(a.report);
    } catch (const FitError& e) {
      throw FitError("component " + std::to_string(j) + ": " + e.what(), e.failed_points());
    }
  }
  return model;
}

Eigen::VectorXd eval_field(const SurrogateModel& model, const Point& x) {
  const BasisEval e = solve_basis(model.nodes, x, model.beta, model.solver);
  return model.coefficients.transpose() * e.weights;
}

const char* to_string(IntegrationStatus s) noexcept {
  switch (s) {
    case IntegrationStatus::Completed: return "completed";
    case IntegrationStatus::DomainExit: return "domain-exit";
    case IntegrationStatus::NumericalBlowup: return "numerical-blowup";
  }
  return "?";
}

Integration integrate(const VectorField& field, const Point& x0, double t0, double t1, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(t1 > t0)) throw ConfigError("integration interval needs t1 > t0");
  require_finite(x0, "initial state");

  const double span = t1 - t0;
  auto full_steps = static_cast<long>(std::floor(span / dt));
  // A remainder below rounding level is folded into the last full step.
  double rest = span - static_cast<double>(full_steps) * dt;
  if (rest <= 1e-9 * dt) {
    rest = 0.0;
  } else if (dt - rest <= 1e-9 * dt) {
    ++full_steps;
    rest = 0.0;
  }
  const long steps = full_steps + (rest > 0.0 ? 1 : 0);

  Integration out;
  std::vector<double> times{t0};
  std::vector<Eigen::VectorXd> states{x0};
  times.reserve(static_cast<std::size_t>(steps + 1));
  states.reserve(static_cast<std::size_t>(steps + 1));

  Eigen::VectorXd x = x0;
  double t = t0;
  for (long k = 0; k < steps; ++k) {
    const double t_next = (k + 1 == steps) ? t1 : t0 + static_cast<double>(k + 1) * dt;
    const double h = t_next - t;
    try {
      // Stage points can overflow before the step does; a surrogate would
      // reject them as non-finite input rather than as outside the hull.
      bool finite = true;
      const auto stage = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        if (!finite || !y.allFinite()) {
          finite = false;
          return y;
        }
        return field(y);
      };
      const Eigen::VectorXd k1 = stage(x);
      const Eigen::VectorXd k2 = stage(x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = stage(x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = stage(x + h * k3);
      Eigen::VectorXd next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!finite || !next.allFinite()) {
        out.status = IntegrationStatus::NumericalBlowup;
        out.message = "non-finite state after t = " + std::to_string(t);
        break;
      }
      x = std::move(next);
    } catch (const OutsideHullError&) {
      out.status = IntegrationStatus::DomainExit;
      out.message = "trajectory left the node hull after t = " + std::to_string(t);
      break;
    }
    t = t_next;
    times.push_back(t);
    states.push_back(x);
  }

  out.last_time = t;
  out.trajectory.times = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                           static_cast<Eigen::Index>(times.size()));
  out.trajectory.states.resize(static_cast<Eigen::Index>(states.size()), x0.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.trajectory.states.row(static_cast<Eigen::Index>(i)) = states[i].transpose();
  }
  return out;
}

Integration integrate(const SurrogateModel& model, const Point& x0, double t0, double t1,
                      double dt) {
  if (x0.size() != model.nodes.dim()) throw DimensionError("initial state has the wrong dimension");
  if (in_hull(model.nodes, x0, model.solver.hull_tol).membership == Membership::Outside) {
    throw OutsideHullError("initial state lies outside the convex hull of the basis nodes");
  }
  return integrate([&model](const Eigen::VectorXd& x) { return eval_field(model, x); }, x0, t0, t1,
                   dt);
}

double trajectory_rms(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size() || a.states.rows() != b.states.rows() ||
      a.states.cols() != b.states.cols()) {
    throw DomainError("trajectories have different shapes");
  }
  if (a.times.size() == 0) throw DomainError("trajectory RMS of empty trajectories");
  for (Eigen::Index k = 0; k < a.times.size(); ++k) {
    if (std::abs(a.times(k) - b.times(k)) > 1e-9 * std::max(1.0, std::abs(a.times(k)))) {
      throw DomainError("trajectories are sampled on different time grids");
    }
  }
  return std::sqrt((a.states - b.states).squaredNorm() / static_cast<double>(a.states.size()));
}

double max_deviation(const Trajectory& a, const Trajectory& b, double t_limit) {
  const Eigen::Index n = std::min(a.samples(), b.samples());
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n && a.times(k) <= t_limit; ++k) {
    if (std::abs(a.times(k) - b.times(k)) > 1e-9 * std::max(1.0, std::abs(a.times(k)))) {
      throw DomainError("trajectories are sampled on different time grids");
    }
    worst = std::max(worst, (a.states.row(k) - b.states.row(k)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Eigen::VectorXd angular_momentum_error(const Trajectory& traj, double h0) {
  if (!(h0 > 0.0)) throw DomainError("reference angular momentum must be positive");
  if (traj.states.cols() != 4) throw DimensionError("orbit states are (r, r_dot, theta, theta_dot)");
  Eigen::VectorXd err(traj.samples());
  for (Eigen::Index k = 0; k < traj.samples(); ++k) {
    const double r = traj.states(k, 0);
    if (!(r > 0.0)) throw DomainError("orbit radius must be positive");
    err(k) = std::abs(r * r * traj.states(k, 3) - h0) / h0;
  }
  return err;
}

}  // namespace maxent
