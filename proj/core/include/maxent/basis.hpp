#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "maxent/geometry.hpp"

namespace maxent {

/// Newton solver settings for the dual problem.
struct SolverOptions {
  double tol = 1e-10;  // ||dual gradient||_inf at convergence, in node units
  int max_iter = 100;
  double hessian_ridge = 1e-12;  // relative to trace(H)
  double line_search_shrink = 0.5;
  double hull_tol = kDefaultHullTol;

  void validate() const;
};

/// Gaussian prior m_i = exp(-beta ||x~_i||^2).  `log_values` is kept
/// alongside because far nodes underflow `values` to zero at large beta.
struct Prior {
  double beta = 0.0;
  Eigen::VectorXd values;
  Eigen::VectorXd log_values;
};

Prior gaussian_prior(const ShiftedNodes& shifted, double beta);

/// Shannon entropy -sum p_i log p_i with 0 log 0 = 0.
double entropy(std::span<const double> weights);
double entropy(const Eigen::VectorXd& weights);

/// Relative entropy sum p_i log(p_i / m_i) with 0 log 0 = 0.
double relative_entropy(const Eigen::VectorXd& weights, const Eigen::VectorXd& prior);

struct DualValue {
  double value = 0.0;  // log Z
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd weights;  // psi at lambda
};

/// log Z(lambda) with Z = sum_j m_j exp(-lambda . x~_j), its gradient
/// -sum psi_i x~_i and Hessian (the covariance of x~ under psi).
/// Evaluated with a log-sum-exp shift.
DualValue dual_objective(const Eigen::VectorXd& lambda, const ShiftedNodes& shifted,
                         const Prior& prior);

struct BasisEval {
  Eigen::VectorXd weights;
  Eigen::VectorXd lambda;
  double residual = 0.0;  // ||sum psi_i x~_i||_inf
  int iterations = 0;
  bool converged = false;
  Membership membership = Membership::Interior;
};

/// Local maxent basis functions psi(x) for the Gaussian prior with locality
/// `beta` (beta = 0 gives the global maxent basis).
///
/// Throws OutsideHullError when x is outside Conv(nodes).  A solve that does
/// not reach `opts.tol` returns the best iterate with `converged == false`.
BasisEval solve_basis(const NodeSet& nodes, const Point& x, double beta,
                      const SolverOptions& opts = {});

BasisEval solve_basis_global(const NodeSet& nodes, const Point& x,
                             const SolverOptions& opts = {});

/// Row i holds psi(queries.col(i)).
struct BasisMatrix {
  Eigen::MatrixXd values;  // n_q x n_B
  std::vector<int> iterations;
  std::vector<double> residuals;
  std::vector<bool> converged;

  std::vector<std::size_t> failed_rows() const;
};

/// Batch evaluation over the columns of `queries` (d x n_q).  Every query is
/// hull-checked first; any Outside query raises OutsideHullError naming its
/// column index.  Rows are independent, so `threads > 1` only changes speed.
BasisMatrix basis_matrix(const NodeSet& nodes, const Eigen::MatrixXd& queries, double beta,
                         const SolverOptions& opts = {}, int threads = 1);

}  // namespace maxent
