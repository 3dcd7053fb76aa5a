#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "octnet/geometry.hpp"
#include "octnet/hausdorff.hpp"

namespace octnet {

enum class DistanceKind { hausdorff, frechet, dtw };

inline const char* distance_kind_name(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::hausdorff: return "hausdorff";
    case DistanceKind::frechet: return "frechet";
    case DistanceKind::dtw: return "dtw";
  }
  return "?";
}

inline DistanceKind distance_kind_from_name(const std::string& name) {
  if (name == "hausdorff") return DistanceKind::hausdorff;
  if (name == "frechet") return DistanceKind::frechet;
  if (name == "dtw") return DistanceKind::dtw;
  throw std::invalid_argument("unknown distance kind: " + name);
}

/// Symmetric Hausdorff distance over the waypoint sets; ordering ignored.
inline double traj_hausdorff(const DiscreteTrajectory& a, const DiscreteTrajectory& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("traj_hausdorff: empty trajectory");
  return symmetric_hausdorff(a.waypoints, b.waypoints);
}

/// Discrete Frechet distance: minimum over monotone couplings of the
/// maximum pairwise Euclidean distance, by the usual O(|a|*|b|) table.
inline double discrete_frechet(const DiscreteTrajectory& a, const DiscreteTrajectory& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("discrete_frechet: empty trajectory");
  const std::size_t n = a.size(), m = b.size();
  std::vector<double> prev(m), curr(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = point_distance(a.waypoints[0], b.waypoints[j]);
    prev[j] = j == 0 ? c : std::max(prev[j - 1], c);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = point_distance(a.waypoints[i], b.waypoints[j]);
      double reach = prev[j];
      if (j > 0) reach = std::min(reach, std::min(prev[j - 1], curr[j - 1]));
      curr[j] = std::max(reach, c);
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

/// DTW with Euclidean point cost, sum aggregation, no warping window.
inline double dtw(const DiscreteTrajectory& a, const DiscreteTrajectory& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw: empty trajectory");
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m, inf), curr(m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = point_distance(a.waypoints[i], b.waypoints[j]);
      if (i == 0 && j == 0) {
        curr[j] = c;
        continue;
      }
      double best = inf;
      if (i > 0) best = std::min(best, prev[j]);
      if (j > 0) best = std::min(best, curr[j - 1]);
      if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      curr[j] = c + best;
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

inline double trajectory_distance(const DiscreteTrajectory& a, const DiscreteTrajectory& b,
                                  DistanceKind kind) {
  switch (kind) {
    case DistanceKind::hausdorff: return traj_hausdorff(a, b);
    case DistanceKind::frechet: return discrete_frechet(a, b);
    case DistanceKind::dtw: return dtw(a, b);
  }
  throw std::invalid_argument("trajectory_distance: bad kind");
}

/// Minimum trajectory distance: distance to the nearest ground truth.
inline double mtd(const DiscreteTrajectory& gen,
                  const std::vector<DiscreteTrajectory>& ground_truths, DistanceKind kind) {
  if (ground_truths.empty()) throw std::invalid_argument("mtd: no ground-truth trajectories");
  double best = std::numeric_limits<double>::infinity();
  for (const DiscreteTrajectory& gt : ground_truths)
    best = std::min(best, trajectory_distance(gen, gt, kind));
  return best;
}

}  // namespace octnet
