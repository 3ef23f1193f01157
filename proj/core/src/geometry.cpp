#include "maxent/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "maxent/errors.hpp"
#include "maxent/random.hpp"

namespace maxent {

namespace {

Eigen::Index affine_rank_of(const Eigen::MatrixXd& coords) {
  if (coords.cols() <= 1) return 0;
  Eigen::MatrixXd diffs = coords.rightCols(coords.cols() - 1).colwise() - coords.col(0);
  const double scale = diffs.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diffs / scale);
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace

void require_finite(const Point& x, const char* what) {
  if (!x.allFinite()) throw DomainError(std::string(what) + " has non-finite coordinates");
}

NodeSet::NodeSet(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
  if (coords_.cols() > 0 && coords_.rows() < 1) throw DimensionError("node dimension must be >= 1");
  if (!coords_.allFinite()) throw DomainError("node coordinates must be finite");
  affine_rank_ = affine_rank_of(coords_);
}

NodeSet NodeSet::from_points(std::span<const Point> points) {
  if (points.empty()) return NodeSet{};
  const Eigen::Index d = points.front().size();
  Eigen::MatrixXd coords(d, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) throw DimensionError("nodes must share one dimension");
    coords.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return NodeSet(std::move(coords));
}

ShiftedNodes shift(const NodeSet& nodes, const Point& x) {
  if (x.size() != nodes.dim()) {
    throw DimensionError("query dimension " + std::to_string(x.size()) +
                         " does not match node dimension " + std::to_string(nodes.dim()));
  }
  return ShiftedNodes{nodes.coords().colwise() - x, x};
}

const char* to_string(Membership m) noexcept {
  switch (m) {
    case Membership::Interior: return "interior";
    case Membership::Boundary: return "boundary";
    case Membership::Outside: return "outside";
  }
  return "?";
}

NodeSet grid_nodes(std::span<const Interval> bounds, std::span<const int> counts) {
  if (bounds.empty()) throw ConfigError("grid needs at least one dimension");
  if (bounds.size() != counts.size()) {
    throw ConfigError("grid bounds and counts have different lengths");
  }
  Eigen::Index total = 1;
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    if (counts[k] < 2) {
      throw ConfigError("grid count along axis " + std::to_string(k) + " must be >= 2");
    }
    if (!(bounds[k].low < bounds[k].high) || !std::isfinite(bounds[k].low) ||
        !std::isfinite(bounds[k].high)) {
      throw ConfigError("grid bounds along axis " + std::to_string(k) + " need low < high");
    }
    total *= counts[k];
  }

  const auto d = static_cast<Eigen::Index>(bounds.size());
  Eigen::MatrixXd coords(d, total);
  std::vector<int> idx(bounds.size(), 0);
  for (Eigen::Index n = 0; n < total; ++n) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto& b = bounds[static_cast<std::size_t>(k)];
      const int c = counts[static_cast<std::size_t>(k)];
      const int i = idx[static_cast<std::size_t>(k)];
      // Endpoints are hit exactly.
      coords(k, n) = (i == c - 1) ? b.high : b.low + (b.high - b.low) * i / (c - 1);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < counts[k]) break;
      idx[k] = 0;
    }
  }
  return NodeSet(std::move(coords));
}

Augmentation augment_nodes(const NodeSet& grid, const Eigen::MatrixXd& candidates,
                           std::size_t k, std::uint64_t seed) {
  if (!grid.empty() && candidates.cols() > 0 && candidates.rows() != grid.dim()) {
    throw DimensionError("candidate dimension does not match grid dimension");
  }
  if (k > static_cast<std::size_t>(candidates.cols())) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " +
                      std::to_string(candidates.cols()) + " candidate points");
  }
  Augmentation out;
  if (k == 0) {
    out.nodes = grid;
    return out;
  }

  const Eigen::Index n = candidates.cols();
  // Squared distance from each candidate to the nearest chosen node.
  Eigen::VectorXd nearest =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  auto absorb = [&](const auto& node) {
    for (Eigen::Index j = 0; j < n; ++j) {
      nearest(j) = std::min(nearest(j), (candidates.col(j) - node).squaredNorm());
    }
  };
  for (Eigen::Index i = 0; i < grid.size(); ++i) absorb(grid.node(i));

  const double dup2 = kDuplicateNodeTol * kDuplicateNodeTol;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  Rng rng(seed);

  // First pick: seeded start among non-duplicate candidates.
  {
    std::vector<Eigen::Index> fresh;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (nearest(j) > dup2) fresh.push_back(j);
    }
    if (!fresh.empty()) {
      const Eigen::Index j = fresh[rng.index(fresh.size())];
      out.selected.push_back(static_cast<std::size_t>(j));
      taken[static_cast<std::size_t>(j)] = true;
      absorb(candidates.col(j));
    }
  }
  while (out.selected.size() < k) {
    Eigen::Index best = -1;
    double best_d = dup2;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!taken[static_cast<std::size_t>(j)] && nearest(j) > best_d) {
        best = j;
        best_d = nearest(j);
      }
    }
    if (best < 0) break;
    out.selected.push_back(static_cast<std::size_t>(best));
    taken[static_cast<std::size_t>(best)] = true;
    absorb(candidates.col(best));
  }
  out.short_of_candidates = out.selected.size() < k;

  const Eigen::Index d = grid.empty() ? candidates.rows() : grid.dim();
  Eigen::MatrixXd coords(d, grid.size() + static_cast<Eigen::Index>(out.selected.size()));
  coords.leftCols(grid.size()) = grid.coords();
  for (std::size_t s = 0; s < out.selected.size(); ++s) {
    coords.col(grid.size() + static_cast<Eigen::Index>(s)) =
        candidates.col(static_cast<Eigen::Index>(out.selected[s]));
  }
  out.nodes = NodeSet(std::move(coords));
  return out;
}

std::vector<Interval> bounding_box(const Eigen::MatrixXd& points, double pad_fraction) {
  if (points.cols() == 0) throw DomainError("bounding box of an empty point set");
  std::vector<Interval> box;
  for (Eigen::Index k = 0; k < points.rows(); ++k) {
    const double lo = points.row(k).minCoeff();
    const double hi = points.row(k).maxCoeff();
    const double pad = (hi > lo) ? pad_fraction * (hi - lo) : std::max(pad_fraction, 1e-12);
    box.push_back({lo - pad, hi + pad});
  }
  return box;
}

}  // namespace maxent
