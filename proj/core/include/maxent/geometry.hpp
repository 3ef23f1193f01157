#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace maxent {

/// A point in R^d. All library entry points check that coordinates are finite.
using Point = Eigen::VectorXd;

/// Ordered set of basis nodes, stored column-wise as a d x N matrix.
///
/// A node set whose affine hull has dimension < d is accepted but flagged
/// `degenerate()`; hull tests then work inside the affine span.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(Eigen::MatrixXd coords);

  static NodeSet from_points(std::span<const Point> points);

  Eigen::Index dim() const noexcept { return coords_.rows(); }
  Eigen::Index size() const noexcept { return coords_.cols(); }
  bool empty() const noexcept { return coords_.cols() == 0; }

  const Eigen::MatrixXd& coords() const noexcept { return coords_; }
  auto node(Eigen::Index i) const { return coords_.col(i); }

  Eigen::Index affine_rank() const noexcept { return affine_rank_; }
  bool degenerate() const noexcept { return affine_rank_ < dim(); }

  friend bool operator==(const NodeSet& a, const NodeSet& b) {
    return a.coords_.rows() == b.coords_.rows() && a.coords_.cols() == b.coords_.cols() &&
           a.coords_ == b.coords_;
  }

 private:
  Eigen::MatrixXd coords_;
  Eigen::Index affine_rank_ = 0;
};

/// Node coordinates relative to a query point: column i is node(i) - origin.
struct ShiftedNodes {
  Eigen::MatrixXd tilde;
  Point origin;
};

ShiftedNodes shift(const NodeSet& nodes, const Point& x);

enum class Membership { Interior, Boundary, Outside };

const char* to_string(Membership m) noexcept;

inline constexpr double kDefaultHullTol = 1e-9;

/// Result of the convex-hull feasibility program.
///
/// `weights` is a convex combination reproducing x (within `residual`) that
/// maximizes the smallest weight; `min_weight` is that smallest weight.
/// Both are empty/zero when the point is Outside.
struct HullTest {
  Membership membership = Membership::Outside;
  Eigen::VectorXd weights;
  double min_weight = 0.0;
  double residual = 0.0;  // ||sum_i w_i x_i - x||_inf
};

/// Classifies x against Conv(nodes) by solving a small linear program over
/// w >= 0, sum w = 1, sum w_i x_i = x.  `tol` is absolute, in node units.
HullTest in_hull(const NodeSet& nodes, const Point& x, double tol = kDefaultHullTol);

struct Interval {
  double low;
  double high;
};

/// Tensor-product grid, uniformly spaced and inclusive of both endpoints.
/// The first coordinate varies fastest.
NodeSet grid_nodes(std::span<const Interval> bounds, std::span<const int> counts);

struct Augmentation {
  NodeSet nodes;
  std::vector<std::size_t> selected;  // indices into the candidate list, in pick order
  bool short_of_candidates = false;   // fewer than k distinct candidates were available
};

inline constexpr double kDuplicateNodeTol = 1e-12;

/// Appends k of the candidate points to `grid` by farthest-point sampling.
/// The seed picks the first candidate; each later pick maximizes the distance
/// to every node chosen so far (grid included).  Candidates within 1e-12 of
/// an existing node are skipped.
Augmentation augment_nodes(const NodeSet& grid, const Eigen::MatrixXd& candidates,
                           std::size_t k, std::uint64_t seed);

/// Axis-aligned bounding box of the columns of `points`, widened on each side
/// by `pad_fraction` of the extent (a zero extent is widened by `pad_fraction`).
std::vector<Interval> bounding_box(const Eigen::MatrixXd& points, double pad_fraction);

void require_finite(const Point& x, const char* what);

}  // namespace maxent
