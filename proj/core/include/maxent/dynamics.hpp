#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "maxent/approximator.hpp"
#include "maxent/basis.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

/// Vector-field surrogate: component j is coefficients.col(j) . psi(x), all
/// components sharing one node set and one basis evaluation per point.
struct SurrogateModel {
  NodeSet nodes;
  double beta = 0.0;
  double alpha = 0.0;
  SolverOptions solver;
  Eigen::MatrixXd coefficients;  // n_B x d
  std::vector<FitReport> reports;

  Eigen::Index dim() const noexcept { return coefficients.cols(); }

  /// Component j as a scalar approximant.
  Approximant component(Eigen::Index j) const;
};

/// Fits every column of `data.values` (the state derivatives) against a
/// single cached basis matrix of the sample points.  Errors carry the
/// failing component index in their message.
SurrogateModel fit_dynamics(const NodeSet& nodes, const Dataset& data, double beta, double alpha,
                            const SolverOptions& solver = {}, const L1Options& l1 = {},
                            int threads = 1);

Eigen::VectorXd eval_field(const SurrogateModel& model, const Point& x);

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // n_t x d, row k at times(k)

  Eigen::Index samples() const noexcept { return times.size(); }
};

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

enum class IntegrationStatus { Completed, DomainExit, NumericalBlowup };

const char* to_string(IntegrationStatus s) noexcept;

/// Trajectory plus how the rollout ended.  On DomainExit/NumericalBlowup the
/// trajectory stops at the last valid state, at `last_time`.
struct Integration {
  Trajectory trajectory;
  IntegrationStatus status = IntegrationStatus::Completed;
  double last_time = 0.0;
  std::string message;

  bool completed() const noexcept { return status == IntegrationStatus::Completed; }
};

/// Classical fixed-step RK4 on [t0, t1]; the final step is shortened to land
/// on t1.  A field that throws OutsideHullError ends the rollout with
/// DomainExit; a non-finite state ends it with NumericalBlowup.
Integration integrate(const VectorField& field, const Point& x0, double t0, double t1, double dt);

/// Surrogate rollout.  Throws OutsideHullError if x0 itself is outside the hull.
Integration integrate(const SurrogateModel& model, const Point& x0, double t0, double t1,
                      double dt);

/// RMS over all samples and components; the time grids must match.
double trajectory_rms(const Trajectory& a, const Trajectory& b);

/// Largest |state difference| over samples with time <= t_limit.
double max_deviation(const Trajectory& a, const Trajectory& b, double t_limit);

/// |r^2 theta_dot - h0| / h0 per sample for states (r, r_dot, theta, theta_dot).
Eigen::VectorXd angular_momentum_error(const Trajectory& traj, double h0);

}  // namespace maxent
