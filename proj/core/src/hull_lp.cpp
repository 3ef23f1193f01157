// Convex-hull membership as a linear program.
//
// With w_i = t + s_i the program
//     maximize t   s.t.  N t + sum s_i = 1,
//                        (sum_i x~_i) t + sum_i s_i x~_i = 0,   t, s >= 0
// is feasible iff x is in Conv(nodes); its optimum t* is the largest
// achievable smallest weight, which is positive iff x is in the relative
// interior.  x~_i = x_i - x, rows scaled by max |x~|.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "maxent/errors.hpp"
#include "maxent/geometry.hpp"

namespace maxent {

namespace {

constexpr double kPivotTol = 1e-11;

/// Dense two-phase tableau simplex for  min c^T z  s.t.  A z = b, z >= 0.
class Simplex {
 public:
  Simplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : m_(a.rows()), n_(a.cols()), tab_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)),
        basis_(static_cast<std::size_t>(m_)), active_(static_cast<std::size_t>(m_), true) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0 ? -1.0 : 1.0;
      tab_.row(i).head(n_) = sign * a.row(i);
      tab_(i, n_ + i) = 1.0;
      tab_(i, rhs()) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
  }

  /// Minimizes the sum of artificials; returns the infeasibility left over.
  double phase_one() {
    tab_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      tab_.row(m_).head(n_) -= tab_.row(i).head(n_);
      tab_(m_, rhs()) -= tab_(i, rhs());
    }
    iterate(n_ + m_);
    const double infeasibility = -tab_(m_, rhs());
    drive_out_artificials();
    return std::max(infeasibility, 0.0);
  }

  /// Minimizes c^T z over the real columns from the phase-one basis.
  void phase_two(const Eigen::VectorXd& c) {
    tab_.row(m_).setZero();
    tab_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_ && c(j) != 0.0) tab_.row(m_) -= c(j) * tab_.row(i);
    }
    iterate(n_);
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) z(j) = std::max(tab_(i, rhs()), 0.0);
    }
    return z;
  }

 private:
  Eigen::Index rhs() const { return n_ + m_; }

  // Dantzig pricing, switching to Bland's rule after a run of degenerate pivots.
  void iterate(Eigen::Index allowed_cols) {
    int stalled = 0;
    const int max_pivots = static_cast<int>(50 * (n_ + m_) + 1000);
    for (int it = 0; it < max_pivots; ++it) {
      const bool bland = stalled > 20;
      Eigen::Index enter = -1;
      double best = -kPivotTol;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        const double rc = tab_(m_, j);
        if (rc < best) {
          enter = j;
          best = rc;
          if (bland) break;
        }
      }
      if (enter < 0) return;

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double aij = tab_(i, enter);
        if (aij > kPivotTol) {
          const double r = tab_(i, rhs()) / aij;
          if (r < ratio - 1e-15 ||
              (r <= ratio + 1e-15 && leave >= 0 &&
               basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
            ratio = r;
            leave = i;
          }
        }
      }
      if (leave < 0) return;  // unbounded direction; cannot happen for the hull program
      stalled = (ratio <= 1e-15) ? stalled + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    tab_.row(row) /= tab_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i != row && tab_(i, col) != 0.0) tab_.row(i) -= tab_(i, col) * tab_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Artificials still basic after phase one sit at (near) zero.  Pivot them
  // out where a real column allows it; otherwise the row is redundant.
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index col = -1;
      double best = kPivotTol;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(tab_(i, j)) > best) {
          best = std::abs(tab_(i, j));
          col = j;
        }
      }
      if (col >= 0 && tab_(i, rhs()) <= 1e-12) {
        pivot(i, col);
      } else if (col < 0) {
        active_[static_cast<std::size_t>(i)] = false;
      }
    }
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd tab_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

}  // namespace

HullTest in_hull(const NodeSet& nodes, const Point& x, double tol) {
  if (!(tol > 0.0)) throw ConfigError("hull tolerance must be positive");
  if (nodes.empty()) throw DomainError("hull test against an empty node set");
  require_finite(x, "query point");
  const ShiftedNodes shifted = shift(nodes, x);
  const Eigen::MatrixXd& xt = shifted.tilde;
  const Eigen::Index d = xt.rows();
  const Eigen::Index n = xt.cols();

  const double scale = std::max(xt.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  Eigen::MatrixXd a(d + 1, n + 1);
  a(0, 0) = static_cast<double>(n);
  a.row(0).tail(n).setOnes();
  a.block(1, 0, d, 1) = xt.rowwise().sum() / scale;
  a.block(1, 1, d, n) = xt / scale;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d + 1);
  b(0) = 1.0;

  HullTest result;
  Simplex lp(a, b);
  const double raw_infeasibility = lp.phase_one();
  if (raw_infeasibility * scale > tol) return result;

  const auto weights_of = [n](const Eigen::VectorXd& z) {
    Eigen::VectorXd w = (z.tail(n).array() + z(0)).matrix();
    return Eigen::VectorXd(w / w.sum());
  };
  const Eigen::VectorXd w1 = weights_of(lp.solution());

  // A point marginally outside (within tol) keeps an artificial variable
  // basic; phase two would then relax that row.  Such points are on the
  // boundary and the phase-one combination is their certificate.
  Eigen::VectorXd w = w1;
  bool interior_possible = false;
  if (raw_infeasibility <= 1e-14) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
    c(0) = -1.0;
    lp.phase_two(c);
    const Eigen::VectorXd w2 = weights_of(lp.solution());
    if ((xt * w2).cwiseAbs().maxCoeff() <= tol) {
      w = w2;
      interior_possible = true;
    }
  }

  result.weights = w;
  result.min_weight = w.minCoeff();
  result.residual = (xt * w).cwiseAbs().maxCoeff();
  if (result.residual > tol) {
    result.weights.resize(0);
    result.min_weight = 0.0;
    return result;
  }
  result.membership = (interior_possible && result.min_weight * scale > tol) ? Membership::Interior
                                                                             : Membership::Boundary;
  return result;
}

}  // namespace maxent
