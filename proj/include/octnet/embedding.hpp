#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "octnet/geometry.hpp"
#include "octnet/linalg.hpp"

namespace octnet {

/// Squared exponential basis over normalised time. Centres are evenly
/// spaced on [0, 1] inclusive of both endpoints.
struct BasisConfig {
  std::size_t num_basis = 10;
  double length_scale_b = 0.15;
  std::vector<double> centers;

  static BasisConfig make(std::size_t num_basis, double length_scale_b) {
    if (num_basis < 2) throw std::invalid_argument("BasisConfig: num_basis must be >= 2");
    if (!(length_scale_b > 0.0))
      throw std::invalid_argument("BasisConfig: length_scale_b must be positive");
    BasisConfig cfg;
    cfg.num_basis = num_basis;
    cfg.length_scale_b = length_scale_b;
    cfg.centers.resize(num_basis);
    for (std::size_t m = 0; m < num_basis; ++m)
      cfg.centers[m] = static_cast<double>(m) / static_cast<double>(num_basis - 1);
    return cfg;
  }
};

/// Ridge strength. The default is large enough to suppress the
/// near-null-space of the overlapping basis: at 1e-4 two almost identical
/// trajectories can embed to weight vectors tens of units apart, which
/// makes the weights useless as a learning target.
struct RidgeConfig {
  double lambda = 1e-2;
};

/// Basis weights of a continuous trajectory; wx then wy, 2M entries total.
struct TrajectoryWeights {
  std::vector<double> wx;
  std::vector<double> wy;

  std::size_t num_basis() const { return wx.size(); }

  std::vector<double> concatenated() const {
    std::vector<double> w(wx);
    w.insert(w.end(), wy.begin(), wy.end());
    return w;
  }

  static TrajectoryWeights from_concatenated(const std::vector<double>& w) {
    if (w.size() % 2 != 0)
      throw std::invalid_argument("TrajectoryWeights: odd concatenated length");
    const std::size_t m = w.size() / 2;
    TrajectoryWeights out;
    out.wx.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(m));
    out.wy.assign(w.begin() + static_cast<std::ptrdiff_t>(m), w.end());
    return out;
  }
};

/// k(tau): entry m is exp(-(tau - center_m)^2 / (2 * l_b^2)).
inline std::vector<double> basis_vector(double tau, const BasisConfig& cfg) {
  std::vector<double> k(cfg.num_basis);
  const double denom = 2.0 * cfg.length_scale_b * cfg.length_scale_b;
  for (std::size_t m = 0; m < cfg.num_basis; ++m) {
    const double d = tau - cfg.centers[m];
    k[m] = std::exp(-(d * d) / denom);
  }
  return k;
}

/// Closed-form KRR fit of a discrete trajectory: solves
///   (lambda I + sum_t k(tau_t) k(tau_t)^T) w = sum_t coord_t k(tau_t)
/// for each coordinate, with tau_t = t / T. The system matrix is assembled
/// symmetrically and factorised by Cholesky; lambda > 0 keeps it SPD.
inline TrajectoryWeights embed(const DiscreteTrajectory& traj, const BasisConfig& basis,
                               const RidgeConfig& ridge) {
  const std::size_t t_count = traj.size();
  if (t_count < 2) throw std::invalid_argument("embed: trajectory needs at least 2 waypoints");
  if (!(ridge.lambda > 0.0)) throw std::invalid_argument("embed: lambda must be positive");
  for (const Point2& p : traj.waypoints)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("embed: non-finite waypoint coordinate");

  const std::size_t m = basis.num_basis;
  Matrix a(m, m, 0.0);
  std::vector<double> bx(m, 0.0), by(m, 0.0);

  for (std::size_t t = 1; t <= t_count; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(t_count);
    const std::vector<double> k = basis_vector(tau, basis);
    const Point2& p = traj.waypoints[t - 1];
    for (std::size_t i = 0; i < m; ++i) {
      const double ki = k[i];
      bx[i] += p.x * ki;
      by[i] += p.y * ki;
      double* arow = a.row_ptr(i);
      for (std::size_t j = i; j < m; ++j) arow[j] += ki * k[j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    a(i, i) += ridge.lambda;
    for (std::size_t j = i + 1; j < m; ++j) a(j, i) = a(i, j);
  }

  const Matrix l = cholesky_factor(a);
  TrajectoryWeights w;
  w.wx = cholesky_solve(l, bx);
  w.wy = cholesky_solve(l, by);
  return w;
}

/// Continuous trajectory evaluation: (wx . k(tau), wy . k(tau)).
inline Point2 reconstruct(const TrajectoryWeights& w, const BasisConfig& cfg, double tau) {
  if (w.wx.size() != cfg.num_basis || w.wy.size() != cfg.num_basis)
    throw std::invalid_argument("reconstruct: weights do not match basis");
  const std::vector<double> k = basis_vector(tau, cfg);
  return {dot(w.wx, k), dot(w.wy, k)};
}

/// Samples the continuous trajectory at n evenly spaced tau values,
/// including both endpoints.
inline DiscreteTrajectory discretise(const TrajectoryWeights& w, const BasisConfig& cfg,
                                     std::size_t n) {
  if (n < 2) throw std::invalid_argument("discretise: need at least 2 samples");
  DiscreteTrajectory traj;
  traj.waypoints.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(n - 1);
    traj.waypoints.push_back(reconstruct(w, cfg, tau));
  }
  return traj;
}

}  // namespace octnet
