#include "maxent/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "maxent/errors.hpp"

namespace maxent {

namespace {

double residual_guard(const Eigen::VectorXd& f) { return 1e-12 * std::max(1.0, f.norm()); }

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double tau) {
  return v.unaryExpr([tau](double x) {
    const double m = std::abs(x) - tau;
    return m > 0.0 ? std::copysign(m, x) : 0.0;
  });
}


// Newton on the smooth problem ||Phi_S a_S - f|| + alpha s^T a_S over the
// support S of `a` with its signs frozen.  Returns an empty vector when the
// reduced problem is degenerate (zero residual) or the signs flip.
Eigen::VectorXd polish_on_support(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& a, double alpha) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != 0.0 || alpha == 0.0) support.push_back(i);
  }
  if (support.empty()) return {};
  const auto ns = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd ps(phi.rows(), ns);
  Eigen::VectorXd sign(ns), as(ns);
  for (Eigen::Index k = 0; k < ns; ++k) {
    ps.col(k) = phi.col(support[static_cast<std::size_t>(k)]);
    as(k) = a(support[static_cast<std::size_t>(k)]);
    sign(k) = alpha == 0.0 ? 0.0 : (as(k) > 0.0 ? 1.0 : -1.0);
  }
  const double guard = residual_guard(f);
  const auto value = [&](const Eigen::VectorXd& v) { return (ps * v - f).norm() + alpha * sign.dot(v); };

  double fv = value(as);
  for (int it = 0; it < 30; ++it) {
    const Eigen::VectorXd r = ps * as - f;
    const double nr = r.norm();
    if (nr <= guard) return {};
    const Eigen::VectorXd pr = ps.transpose() * r;
    const Eigen::VectorXd grad = pr / nr + alpha * sign;
    if (grad.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + as.cwiseAbs().maxCoeff())) break;
    const Eigen::MatrixXd hess = (ps.transpose() * ps - pr * pr.transpose() / (nr * nr)) / nr;
    const Eigen::VectorXd step = -hess.completeOrthogonalDecomposition().solve(grad);
    if (!step.allFinite() || !(grad.dot(step) < 0.0)) break;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd trial = as + t * step;
      const double ft = value(trial);
      if (ft <= fv) {
        moved = (trial != as);
        as = trial;
        fv = ft;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  for (Eigen::Index k = 0; k < ns; ++k) {
    if (alpha > 0.0 && as(k) * sign(k) <= 0.0) return {};
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
  for (Eigen::Index k = 0; k < ns; ++k) out(support[static_cast<std::size_t>(k)]) = as(k);
  return out;
}

}  // namespace

void Dataset::validate() const {
  if (points.cols() != values.rows()) {
    throw DimensionError("dataset has " + std::to_string(points.cols()) + " points but " +
                         std::to_string(values.rows()) + " observation rows");
  }
  if (!points.allFinite()) throw DomainError("dataset points must be finite");
  if (!values.allFinite()) throw DomainError("dataset values must be finite");
}

Dataset Dataset::column(Eigen::Index j) const {
  if (j < 0 || j >= values.cols()) throw DimensionError("dataset column out of range");
  return Dataset{points, values.col(j)};
}

double rms(const Eigen::VectorXd& residual) {
  if (residual.size() == 0) throw DomainError("RMS of an empty residual");
  return std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()));
}

double l1_objective(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f, const Eigen::VectorXd& a,
                    double alpha) {
  return (phi * a - f).norm() + alpha * a.lpNorm<1>();
}

CoefficientFit least_squares_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f) {
  if (phi.rows() != f.size()) throw DimensionError("basis matrix and data disagree in rows");
  CoefficientFit out;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi);
  out.coefficients = cod.solve(f);
  out.objective = (phi * out.coefficients - f).norm();
  return out;
}

double optimality_residual(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f,
                           const Eigen::VectorXd& a, double alpha) {
  const Eigen::VectorXd r = phi * a - f;
  const Eigen::VectorXd grad = phi.transpose() * r / std::max(r.norm(), residual_guard(f));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double v;
    if (a(i) > 0.0) {
      v = std::abs(grad(i) + alpha);
    } else if (a(i) < 0.0) {
      v = std::abs(grad(i) - alpha);
    } else {
      v = std::max(0.0, std::abs(grad(i)) - alpha);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

CoefficientFit l1_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f, double alpha,
                               const L1Options& opts, bool record_history) {
  if (phi.rows() != f.size()) throw DimensionError("basis matrix and data disagree in rows");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (opts.max_iter < 1 || !(opts.tol > 0.0)) throw ConfigError("invalid l1 solver options");

  const Eigen::Index n = phi.cols();
  const double guard = residual_guard(f);
  auto smooth = [&](const Eigen::VectorXd& a) { return (phi * a - f).norm(); };
  auto objective = [&](const Eigen::VectorXd& a) { return smooth(a) + alpha * a.lpNorm<1>(); };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = x;
  double fx = objective(x);
  double t = 1.0;
  double lip = std::max(phi.squaredNorm() / std::max(f.norm(), guard), 1e-12);

  CoefficientFit out;
  if (record_history) out.objective_history.push_back(fx);
  out.converged = false;
  int stalled = 0;
  int k = 0;
  for (; k < opts.max_iter; ++k) {
    const Eigen::VectorXd ry = phi * y - f;
    const double gy = ry.norm();
    const Eigen::VectorXd grad = phi.transpose() * ry / std::max(gy, guard);

    Eigen::VectorXd z;
    for (int bt = 0; bt < 200; ++bt) {
      z = soft_threshold(y - grad / lip, alpha / lip);
      const Eigen::VectorXd dz = z - y;
      const double model = gy + grad.dot(dz) + 0.5 * lip * dz.squaredNorm();
      if (smooth(z) <= model + 1e-15 * std::max(1.0, gy)) break;
      lip *= 2.0;
    }

    const double fz = objective(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Eigen::VectorXd x_next;
    if (fz <= fx) {
      x_next = z;
      y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    } else {
      // Monotone step: keep x and restart the momentum from it.
      x_next = x;
      y = x;
      t = 1.0;
    }
    const double fx_next = std::min(fz, fx);
    stalled = (fx - fx_next <= 1e-16 * std::max(1.0, fx)) ? stalled + 1 : 0;
    x = std::move(x_next);
    fx = fx_next;
    if (record_history) out.objective_history.push_back(fx);
    lip *= 0.9;

    if ((k % 10 == 0 || stalled > 0) &&
        optimality_residual(phi, f, x, alpha) <= opts.tol * (1.0 + x.cwiseAbs().maxCoeff())) {
      out.converged = true;
      ++k;
      break;
    }
    if (stalled > 500) break;
  }

  // First-order progress ends where the objective decrease drops below
  // rounding.  Finish with Newton on the identified support; accept it only
  // if the certificate improves and the objective stays within rounding.
  const double tol_x = opts.tol * (1.0 + x.cwiseAbs().maxCoeff());
  double cert = optimality_residual(phi, f, x, alpha);
  if (cert > 1e-3 * tol_x) {
    const Eigen::VectorXd p = polish_on_support(phi, f, x, alpha);
    if (p.size() == n) {
      const double fp = objective(p);
      const double cp = optimality_residual(phi, f, p, alpha);
      if (cp < cert && fp <= fx + 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, fx)) {
        x = p;
        fx = fp;
        cert = cp;
        if (record_history) out.objective_history.push_back(fx);
      }
    }
  }
  out.converged = cert <= opts.tol * (1.0 + x.cwiseAbs().maxCoeff());
  out.coefficients = std::move(x);
  out.objective = fx;
  out.iterations = k;
  return out;
}

CoefficientFit fit_coefficients(const Eigen::MatrixXd& phi, const Eigen::VectorXd& f, double alpha,
                                const L1Options& opts) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and >= 0");
  if (alpha == 0.0) return least_squares_coefficients(phi, f);
  return l1_coefficients(phi, f, alpha, opts);
}

Approximant fit_on_basis(const NodeSet& nodes, const BasisMatrix& basis, const Eigen::VectorXd& f,
                         double beta, double alpha, const SolverOptions& solver,
                         const L1Options& l1) {
  if (basis.values.rows() != f.size()) throw DimensionError("basis rows and data disagree");
  if (basis.values.rows() == 0) throw DomainError("cannot fit an empty dataset");
  if (const auto failed = basis.failed_rows(); !failed.empty()) {
    std::string msg = "basis solver did not converge at training point";
    for (std::size_t k = 0; k < failed.size() && k < 10; ++k) msg += " " + std::to_string(failed[k]);
    throw FitError(msg, failed);
  }

  const CoefficientFit c = fit_coefficients(basis.values, f, alpha, l1);
  if (!c.coefficients.allFinite()) throw FitError("fitted coefficients are not finite");

  Approximant model;
  model.nodes = nodes;
  model.beta = beta;
  model.alpha = alpha;
  model.solver = solver;
  model.coefficients = c.coefficients;
  model.report.training_rms = rms(basis.values * c.coefficients - f);
  model.report.objective = l1_objective(basis.values, f, c.coefficients, alpha);
  model.report.solver_iterations = c.iterations;
  for (int it : basis.iterations) model.report.basis_iterations += it;
  return model;
}

Approximant fit(const NodeSet& nodes, const Dataset& data, double beta, double alpha,
                const SolverOptions& solver, const L1Options& l1, int threads) {
  data.validate();
  if (data.outputs() != 1) throw DimensionError("fit expects scalar observations (one column)");
  if (data.size() == 0) throw DomainError("cannot fit an empty dataset");
  if (data.dim() != nodes.dim()) throw DimensionError("data and node dimensions differ");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  const BasisMatrix basis = basis_matrix(nodes, data.points, beta, solver, threads);
  return fit_on_basis(nodes, basis, data.values.col(0), beta, alpha, solver, l1);
}

double predict(const Approximant& model, const Point& x) {
  const BasisEval e = solve_basis(model.nodes, x, model.beta, model.solver);
  return model.coefficients.dot(e.weights);
}

Eigen::VectorXd predict_many(const Approximant& model, const Eigen::MatrixXd& points, int threads) {
  const BasisMatrix b = basis_matrix(model.nodes, points, model.beta, model.solver, threads);
  return b.values * model.coefficients;
}

double rms_error(const Approximant& model, const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw DomainError("RMS error over an empty dataset");
  if (data.outputs() != 1) throw DimensionError("rms_error expects scalar observations");
  return rms(predict_many(model, data.points) - data.values.col(0));
}

std::vector<Eigen::Index> active_nodes(const Approximant& model, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("active-node threshold must be > 0");
  std::vector<Eigen::Index> idx;
  if (model.coefficients.size() == 0) return idx;
  const double amax = model.coefficients.cwiseAbs().maxCoeff();
  if (amax == 0.0) return idx;
  for (Eigen::Index i = 0; i < model.coefficients.size(); ++i) {
    if (std::abs(model.coefficients(i)) > threshold * amax) idx.push_back(i);
  }
  return idx;
}

}  // namespace maxent
