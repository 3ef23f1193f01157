#pragma once

#include <initializer_list>
#include <vector>

#include <Eigen/Core>

#include "maxent/geometry.hpp"

namespace testing {

inline maxent::Point pt(std::initializer_list<double> v) {
  maxent::Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

// Nodes given as a list of points.
inline maxent::NodeSet nodes(std::initializer_list<std::initializer_list<double>> pts) {
  std::vector<maxent::Point> v;
  for (const auto& p : pts) v.push_back(pt(p));
  return maxent::NodeSet::from_points(v);
}

inline maxent::NodeSet grid(std::vector<maxent::Interval> bounds, int per_axis) {
  std::vector<int> counts(bounds.size(), per_axis);
  return maxent::grid_nodes(bounds, counts);
}

}  // namespace testing
