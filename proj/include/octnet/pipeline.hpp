#pragma once

#include <string>
#include <utility>
#include <vector>

#include "octnet/embedding.hpp"
#include "octnet/hausdorff.hpp"
#include "octnet/mdn.hpp"
#include "octnet/occupancy.hpp"
#include "octnet/synth.hpp"

namespace octnet {

/// Training flow: encode every map as a similarity-feature row of the
/// Gram matrix, embed every observed trajectory as basis weights, then fit
/// the density network on the flattened (phi, w) pairs. The returned model
/// carries the frozen training-map point sets it needs at query time.
inline MdnModel train_pipeline(const Dataset& train_set, const MdnConfig& mdn_cfg,
                               const TrainConfig& train_cfg, const BasisConfig& basis,
                               const RidgeConfig& ridge, const KernelConfig& kernel) {
  if (train_set.entries.empty()) throw std::invalid_argument("train_pipeline: empty dataset");

  std::vector<PointSet> pointsets;
  std::vector<std::string> ids;
  for (const DatasetEntry& entry : train_set.entries) {
    pointsets.push_back(occupied_points(entry.grid));
    ids.push_back(entry.map_id);
  }
  const std::vector<SimilarityFeature> features = gram_features(pointsets, kernel, ids);

  std::vector<std::pair<SimilarityFeature, std::vector<TrajectoryWeights>>> dataset;
  for (std::size_t n = 0; n < train_set.entries.size(); ++n) {
    std::vector<TrajectoryWeights> weights;
    for (const DiscreteTrajectory& traj : train_set.entries[n].trajectories)
      weights.push_back(embed(traj, basis, ridge));
    dataset.emplace_back(features[n], std::move(weights));
  }

  MdnConfig cfg = mdn_cfg;
  cfg.input_dim = train_set.entries.size();
  cfg.weight_dim = 2 * basis.num_basis;

  MdnModel model = train(dataset, cfg, train_cfg);
  model.basis = basis;
  model.ridge = ridge;
  model.kernel = kernel;
  model.training_maps = std::move(pointsets);
  model.training_map_ids = std::move(ids);
  return model;
}

}  // namespace octnet
