#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "octnet/embedding.hpp"
#include "octnet/errors.hpp"
#include "octnet/hausdorff.hpp"
#include "octnet/mdn.hpp"
#include "octnet/occupancy.hpp"
#include "octnet/rng.hpp"

namespace octnet {

struct GenerationConfig {
  std::size_t num_validity_checks = 100;  // evenly spaced tau samples
  std::size_t max_attempts = 1000;        // budget per accepted trajectory

  void validate() const {
    if (num_validity_checks < 2)
      throw std::invalid_argument("GenerationConfig: num_validity_checks must be >= 2");
    if (max_attempts < 1)
      throw std::invalid_argument("GenerationConfig: max_attempts must be >= 1");
  }
};

/// A trajectory is valid when its reconstruction at every checked tau in
/// {0, 1/(n-1), ..., 1} lands on a free in-bounds cell.
inline bool is_valid(const TrajectoryWeights& w, const BasisConfig& basis,
                     const OccupancyGrid& grid, const GenerationConfig& cfg) {
  cfg.validate();
  for (std::size_t i = 0; i < cfg.num_validity_checks; ++i) {
    const double tau =
        static_cast<double>(i) / static_cast<double>(cfg.num_validity_checks - 1);
    if (is_occupied(grid, reconstruct(w, basis, tau))) return false;
  }
  return true;
}

struct BatchStats {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::uint64_t attempts = 0;

  bool complete() const { return accepted == requested; }
  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts);
  }
};

struct BatchResult {
  std::vector<TrajectoryWeights> weights;
  BatchStats stats;
};

namespace detail {

/// Similarity feature of the queried map. A map with no occupied cells has
/// no point set to compare; it is treated as maximally dissimilar to every
/// training map (kernel value 0, the distant limit of the exponential).
inline SimilarityFeature map_feature(const MdnModel& model, const OccupancyGrid& grid) {
  const PointSet pts = occupied_points(grid);
  if (pts.empty()) {
    SimilarityFeature phi;
    phi.values.assign(model.training_maps.size(), 0.0);
    phi.reference_ids = model.training_map_ids;
    return phi;
  }
  return query_feature(pts, model.training_maps, model.kernel, model.training_map_ids);
}

/// Rejection loop for one trajectory against a precomputed mixture.
/// Returns true on acceptance; `attempts` accumulates every draw made.
inline bool sample_valid(const MdnModel& model, const MixtureParams& params,
                         const OccupancyGrid& grid, const GenerationConfig& cfg, Rng& rng,
                         TrajectoryWeights& out, std::uint64_t& attempts) {
  for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    ++attempts;
    TrajectoryWeights w = TrajectoryWeights::from_concatenated(sample_weights(params, rng));
    if (is_valid(w, model.basis, grid, cfg)) {
      out = std::move(w);
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// One valid trajectory by rejection sampling: encode the queried map
/// against the model's frozen training maps, run the eval-mode forward,
/// then draw and validity-check until acceptance. Throws generation_error
/// when max_attempts draws were all rejected.
inline TrajectoryWeights generate(const MdnModel& model, const OccupancyGrid& grid,
                                  const GenerationConfig& cfg, Rng& rng) {
  cfg.validate();
  const SimilarityFeature phi = detail::map_feature(model, grid);
  const MixtureParams params = forward_eval(model, phi);
  TrajectoryWeights w;
  std::uint64_t attempts = 0;
  if (!detail::sample_valid(model, params, grid, cfg, rng, w, attempts))
    throw generation_error("generate: no valid trajectory after " +
                               std::to_string(attempts) + " attempts",
                           attempts);
  return w;
}

/// `count` valid trajectories plus acceptance statistics. On exhaustion the
/// result carries the partial list and its stats instead of throwing.
inline BatchResult generate_batch(const MdnModel& model, const OccupancyGrid& grid,
                                  const GenerationConfig& cfg, std::size_t count, Rng& rng) {
  cfg.validate();
  if (count < 1) throw std::invalid_argument("generate_batch: count must be >= 1");
  const SimilarityFeature phi = detail::map_feature(model, grid);
  const MixtureParams params = forward_eval(model, phi);

  BatchResult result;
  result.stats.requested = count;
  for (std::size_t i = 0; i < count; ++i) {
    TrajectoryWeights w;
    if (!detail::sample_valid(model, params, grid, cfg, rng, w, result.stats.attempts)) break;
    result.weights.push_back(std::move(w));
    ++result.stats.accepted;
  }
  return result;
}

}  // namespace octnet
