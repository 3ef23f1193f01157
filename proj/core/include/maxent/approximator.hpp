#pragma once

#include <vector>

#include <Eigen/Core>

#include "maxent/basis.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

/// Sample points (d x n, one column per sample) with n x m observations.
struct Dataset {
  Eigen::MatrixXd points;
  Eigen::MatrixXd values;

  Eigen::Index size() const noexcept { return points.cols(); }
  Eigen::Index dim() const noexcept { return points.rows(); }
  Eigen::Index outputs() const noexcept { return values.cols(); }

  /// Throws DimensionError/DomainError when rows disagree or values are not finite.
  void validate() const;

  /// One column of the observations as a scalar dataset.
  Dataset column(Eigen::Index j) const;
};

/// Settings of the proximal solver used for alpha > 0.
struct L1Options {
  int max_iter = 200000;
  double tol = 1e-9;  // optimality residual, relative to 1 + ||a||_inf
};

struct CoefficientFit {
  Eigen::VectorXd coefficients;
  double objective = 0.0;  // ||Phi a - f||_2 + alpha ||a||_1
  int iterations = 0;
  bool converged = true;
  std::vector<double> objective_history;  // filled only when requested
};

/// ||Phi a - f||_2 + alpha ||a||_1.
double l1_objective(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f,
                    const Eigen::VectorXd& a, double alpha);

/// Minimum-norm least squares via a rank-revealing complete orthogonal decomposition.
CoefficientFit least_squares_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f);

/// Minimizes the unsquared objective ||Phi a - f||_2 + alpha ||a||_1 with a
/// monotone accelerated proximal-gradient method and backtracking on the
/// local Lipschitz constant of grad ||r|| = Phi^T r / ||r||.
CoefficientFit l1_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f, double alpha,
                               const L1Options& opts = {}, bool record_history = false);

/// Distance from zero to the subdifferential of the objective at `a`
/// (infinity norm).  Meaningful only where Phi a != f.
double optimality_residual(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f,
                           const Eigen::VectorXd& a, double alpha);

/// alpha == 0 goes through least squares; alpha > 0 through the proximal solver.
CoefficientFit fit_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f, double alpha,
                                const L1Options& opts = {});

struct FitReport {
  double training_rms = 0.0;
  double objective = 0.0;
  int solver_iterations = 0;
  long basis_iterations = 0;  // Newton iterations summed over the training points
};

/// f^(x) = a . psi(x) over a fixed node set.
struct Approximant {
  NodeSet nodes;
  double beta = 0.0;
  double alpha = 0.0;
  SolverOptions solver;
  Eigen::VectorXd coefficients;
  FitReport report;
};

/// Fits a scalar dataset (m == 1).  Throws OutsideHullError naming the data
/// indices outside Conv(nodes) and FitError when the basis solver fails at
/// any training point.
Approximant fit(const NodeSet& nodes, const Dataset& data, double beta, double alpha,
                const SolverOptions& solver = {}, const L1Options& l1 = {}, int threads = 1);

/// Fit against a precomputed basis matrix (rows = training points).
Approximant fit_on_basis(const NodeSet& nodes, const BasisMatrix& basis, const Eigen::VectorXd& f,
                         double beta, double alpha, const SolverOptions& solver = {},
                         const L1Options& l1 = {});

double predict(const Approximant& model, const Point& x);

/// Predictions at the columns of `points`.
Eigen::VectorXd predict_many(const Approximant& model, const Eigen::MatrixXd& points,
                             int threads = 1);

double rms_error(const Approximant& model, const Dataset& data);

double rms(const Eigen::VectorXd& residual);

/// Indices i with |a_i| > threshold * max_j |a_j|.
std::vector<Eigen::Index> active_nodes(const Approximant& model, double threshold);

}  // namespace maxent
