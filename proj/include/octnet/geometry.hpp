#pragma once

#include <cmath>
#include <vector>

namespace octnet {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2& a, const Point2& b) {
    return a.x == b.x && a.y == b.y;
  }
};

/// Finite unordered set of world-coordinate points.
using PointSet = std::vector<Point2>;

/// Ordered waypoint sequence, timesteps t = 1..T.
struct DiscreteTrajectory {
  std::vector<Point2> waypoints;

  std::size_t size() const { return waypoints.size(); }
  bool empty() const { return waypoints.empty(); }

  friend bool operator==(const DiscreteTrajectory& a, const DiscreteTrajectory& b) {
    return a.waypoints == b.waypoints;
  }
};

inline double point_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double point_distance_sq(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace octnet
