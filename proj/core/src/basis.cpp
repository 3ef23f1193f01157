#include "maxent/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "maxent/errors.hpp"

namespace maxent {

namespace {

constexpr double kLambdaBlowup = 1e8;
// Largest change of any exponent lambda . x~_i allowed in one Newton step.
constexpr double kMaxExponentStep = 50.0;

void check_probability(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-14)) throw DomainError("probability weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("probability weights must sum to 1");
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Exponents a_j = log m_j - lambda . x~_j, and their maximum.
Eigen::VectorXd exponents(const Eigen::VectorXd& lambda, const ShiftedNodes& shifted,
                          const Prior& prior) {
  return prior.log_values - shifted.tilde.transpose() * lambda;
}

double log_partition(const Eigen::VectorXd& lambda, const ShiftedNodes& shifted,
                     const Prior& prior) {
  const Eigen::VectorXd a = exponents(lambda, shifted, prior);
  const double amax = a.maxCoeff();
  return amax + std::log((a.array() - amax).exp().sum());
}

BasisEval solve_dual(const ShiftedNodes& shifted, const Prior& prior, const SolverOptions& opts) {
  const Eigen::Index d = shifted.tilde.rows();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d);
  DualValue cur = dual_objective(lambda, shifted, prior);
  double res = cur.gradient.cwiseAbs().maxCoeff();
  const double reach = std::max(shifted.tilde.colwise().norm().maxCoeff(), 1e-300);

  BasisEval out;
  Eigen::VectorXd best_lambda = lambda;
  double best_res = res;
  int it = 0;
  for (; it < opts.max_iter && res > opts.tol; ++it) {
    if (lambda.cwiseAbs().maxCoeff() > kLambdaBlowup) break;

    const double trace = cur.hessian.trace();
    Eigen::MatrixXd h = cur.hessian;
    h.diagonal().array() += opts.hessian_ridge * std::max(trace, 1e-300);
    Eigen::VectorXd step = -h.ldlt().solve(cur.gradient);
    if (step.allFinite()) {
      const double step_reach = step.stableNorm() * reach;
      if (step_reach > kMaxExponentStep) step *= kMaxExponentStep / step_reach;
    }
    // Far nodes can underflow every weight but one, leaving H (numerically)
    // zero; fall back to a clipped steepest-descent step.
    if (!step.allFinite() || !(cur.gradient.dot(step) < 0.0)) {
      step = -cur.gradient * (kMaxExponentStep / (cur.gradient.stableNorm() * reach));
    }

    const double slope = cur.gradient.dot(step);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = lambda + t * step;
      const double f = log_partition(trial, shifted, prior);
      if (f <= cur.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the decrease drowns in rounding; accept a step that
      // keeps the value flat to machine precision and shrinks the gradient.
      if (f <= cur.value + 8 * std::numeric_limits<double>::epsilon() *
                               std::max(1.0, std::abs(cur.value))) {
        const DualValue probe = dual_objective(trial, shifted, prior);
        if (probe.gradient.cwiseAbs().maxCoeff() < res) {
          accepted = true;
          break;
        }
      }
      t *= opts.line_search_shrink;
    }
    if (!accepted) break;

    lambda = trial;
    cur = dual_objective(lambda, shifted, prior);
    res = cur.gradient.cwiseAbs().maxCoeff();
    if (res < best_res) {
      best_res = res;
      best_lambda = lambda;
    }
  }

  if (best_res < res) cur = dual_objective(best_lambda, shifted, prior);
  out.lambda = best_res < res ? best_lambda : lambda;
  out.residual = std::min(best_res, res);
  out.weights = std::move(cur.weights);
  out.iterations = it;
  out.converged = out.residual <= opts.tol;
  return out;
}

void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw ConfigError("solver tol must be > 0");
  if (max_iter < 1) throw ConfigError("solver max_iter must be >= 1");
  if (!(hessian_ridge >= 0.0)) throw ConfigError("hessian_ridge must be >= 0");
  if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
    throw ConfigError("line_search_shrink must lie in (0, 1)");
  }
  if (!(hull_tol > 0.0)) throw ConfigError("hull_tol must be > 0");
}

Prior gaussian_prior(const ShiftedNodes& shifted, double beta) {
  check_beta(beta);
  Prior p;
  p.beta = beta;
  p.log_values = -beta * shifted.tilde.colwise().squaredNorm().transpose();
  p.values = p.log_values.array().exp();
  return p;
}

double entropy(std::span<const double> weights) {
  check_probability(weights);
  double h = 0.0;
  for (double p : weights) h -= xlogx(p);
  return h;
}

double entropy(const Eigen::VectorXd& weights) {
  return entropy(std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
}

double relative_entropy(const Eigen::VectorXd& weights, const Eigen::VectorXd& prior) {
  if (weights.size() != prior.size()) throw DimensionError("weights and prior differ in length");
  check_probability(std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
  double h = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(prior(i) > 0.0)) throw DomainError("prior entries must be positive");
    if (weights(i) > 0.0) h += weights(i) * std::log(weights(i) / prior(i));
  }
  return h;
}

DualValue dual_objective(const Eigen::VectorXd& lambda, const ShiftedNodes& shifted,
                         const Prior& prior) {
  if (lambda.size() != shifted.tilde.rows() || prior.log_values.size() != shifted.tilde.cols()) {
    throw DimensionError("dual objective operands disagree in dimension");
  }
  const Eigen::VectorXd a = exponents(lambda, shifted, prior);
  const double amax = a.maxCoeff();
  Eigen::VectorXd e = (a.array() - amax).exp();
  const double z = e.sum();

  DualValue out;
  out.value = amax + std::log(z);
  out.weights = e / z;
  const Eigen::VectorXd mean = shifted.tilde * out.weights;
  out.gradient = -mean;
  const Eigen::MatrixXd centered = shifted.tilde.colwise() - mean;
  out.hessian = centered * out.weights.asDiagonal() * centered.transpose();
  return out;
}

BasisEval solve_basis(const NodeSet& nodes, const Point& x, double beta, const SolverOptions& opts) {
  opts.validate();
  check_beta(beta);
  const ShiftedNodes shifted = shift(nodes, x);
  const HullTest hull = in_hull(nodes, x, opts.hull_tol);
  if (hull.membership == Membership::Outside) {
    throw OutsideHullError("query point lies outside the convex hull of the basis nodes");
  }
  BasisEval out = solve_dual(shifted, gaussian_prior(shifted, beta), opts);
  out.membership = hull.membership;
  return out;
}

// Shannon-entropy basis from its own dual, F(mu) = log sum exp(mu . x_i) - mu . x
// in unshifted coordinates (mu = -lambda).  Kept separate from solve_dual so
// the two can check each other at beta = 0.
BasisEval solve_basis_global(const NodeSet& nodes, const Point& x, const SolverOptions& opts) {
  opts.validate();
  if (x.size() != nodes.dim()) throw DimensionError("query dimension does not match the nodes");
  const HullTest hull = in_hull(nodes, x, opts.hull_tol);
  if (hull.membership == Membership::Outside) {
    throw OutsideHullError("query point lies outside the convex hull of the basis nodes");
  }
  const Eigen::MatrixXd& c = nodes.coords();
  const double reach = std::max((c.colwise() - x).colwise().norm().maxCoeff(), 1e-300);

  struct State {
    double f;
    Eigen::VectorXd psi, grad;
  };
  const auto eval = [&](const Eigen::VectorXd& mu) {
    const Eigen::VectorXd a = c.transpose() * mu;
    const double amax = a.maxCoeff();
    const Eigen::VectorXd e = (a.array() - amax).exp();
    const double z = e.sum();
    State s{amax + std::log(z) - mu.dot(x), e / z, {}};
    s.grad = c * s.psi - x;
    return s;
  };

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(nodes.dim());
  State cur = eval(mu);
  BasisEval out;
  int it = 0;
  for (; it < opts.max_iter && cur.grad.cwiseAbs().maxCoeff() > opts.tol; ++it) {
    const Eigen::VectorXd mean = c * cur.psi;
    const Eigen::MatrixXd centered = c.colwise() - mean;
    const Eigen::MatrixXd h = centered * cur.psi.asDiagonal() * centered.transpose();
    Eigen::VectorXd step = -h.completeOrthogonalDecomposition().solve(cur.grad);
    if (!step.allFinite() || !(step.dot(cur.grad) < 0.0)) step = -cur.grad;
    const double size = step.stableNorm() * reach;
    if (size > kMaxExponentStep) step *= kMaxExponentStep / size;

    double t = 1.0;
    State next = eval(mu + step);
    while (next.f > cur.f + 1e-4 * t * step.dot(cur.grad) && t > 1e-12) {
      t *= 0.5;
      next = eval(mu + t * step);
    }
    if (!(next.f <= cur.f) && !(next.grad.cwiseAbs().maxCoeff() < cur.grad.cwiseAbs().maxCoeff())) break;
    mu += t * step;
    cur = std::move(next);
    if (mu.cwiseAbs().maxCoeff() > kLambdaBlowup) break;
  }
  out.lambda = -mu;
  out.weights = cur.psi;
  out.residual = cur.grad.cwiseAbs().maxCoeff();
  out.iterations = it;
  out.converged = out.residual <= opts.tol;
  out.membership = hull.membership;
  return out;
}

std::vector<std::size_t> BasisMatrix::failed_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < converged.size(); ++i) {
    if (!converged[i]) rows.push_back(i);
  }
  return rows;
}

BasisMatrix basis_matrix(const NodeSet& nodes, const Eigen::MatrixXd& queries, double beta,
                         const SolverOptions& opts, int threads) {
  opts.validate();
  check_beta(beta);
  if (queries.cols() > 0 && queries.rows() != nodes.dim()) {
    throw DimensionError("query dimension does not match node dimension");
  }
  const Eigen::Index nq = queries.cols();
  const auto n = static_cast<std::size_t>(nq);

  std::vector<Membership> membership(n);
  std::vector<std::size_t> outside;
  for (Eigen::Index i = 0; i < nq; ++i) {
    membership[static_cast<std::size_t>(i)] =
        in_hull(nodes, queries.col(i), opts.hull_tol).membership;
    if (membership[static_cast<std::size_t>(i)] == Membership::Outside) {
      outside.push_back(static_cast<std::size_t>(i));
    }
  }
  if (!outside.empty()) {
    std::string msg = "query points outside the convex hull of the basis nodes at index";
    for (std::size_t k = 0; k < outside.size() && k < 10; ++k) msg += " " + std::to_string(outside[k]);
    if (outside.size() > 10) msg += " ...";
    throw OutsideHullError(msg, std::move(outside));
  }

  BasisMatrix out;
  out.values.resize(nq, nodes.size());
  out.iterations.assign(n, 0);
  out.residuals.assign(n, 0.0);
  std::vector<char> ok(n, 0);

  auto solve_rows = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i) {
      const ShiftedNodes shifted = shift(nodes, queries.col(i));
      const BasisEval e = solve_dual(shifted, gaussian_prior(shifted, beta), opts);
      const auto k = static_cast<std::size_t>(i);
      out.values.row(i) = e.weights.transpose();
      out.iterations[k] = e.iterations;
      out.residuals[k] = e.residual;
      ok[k] = e.converged ? 1 : 0;
    }
  };

  const Eigen::Index workers = std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(nq, 1));
  if (workers == 1) {
    solve_rows(0, nq);
  } else {
    std::vector<std::jthread> pool;
    const Eigen::Index chunk = (nq + workers - 1) / workers;
    for (Eigen::Index w = 0; w < workers; ++w) {
      const Eigen::Index b = w * chunk;
      const Eigen::Index e = std::min(nq, b + chunk);
      if (b < e) pool.emplace_back(solve_rows, b, e);
    }
  }
  out.converged.assign(ok.begin(), ok.end());
  return out;
}

}  // namespace maxent
