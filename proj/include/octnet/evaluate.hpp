#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "octnet/embedding.hpp"
#include "octnet/generator.hpp"
#include "octnet/mdn.hpp"
#include "octnet/rng.hpp"
#include "octnet/synth.hpp"
#include "octnet/trajectory_distance.hpp"

namespace octnet {

struct EvalConfig {
  std::size_t num_per_map = 50;
  std::size_t discretise_points = 100;
  GenerationConfig gen;
  std::uint64_t seed = 1;
};

struct MtdRow {
  double hausdorff = 0.0;
  double frechet = 0.0;
  double dtw_value = 0.0;
};

struct MapEval {
  std::string map_id;
  BatchStats stats;
  std::vector<MtdRow> rows;
  std::vector<DiscreteTrajectory> trajectories;
};

struct VariantEval {
  std::string label;
  double final_train_nll = std::numeric_limits<double>::quiet_NaN();
  std::vector<MapEval> maps;
};

struct EvalOutcome {
  std::vector<VariantEval> variants;
  VariantEval baseline;
};

namespace detail {

inline MtdRow mtd_row(const DiscreteTrajectory& gen,
                      const std::vector<DiscreteTrajectory>& truths) {
  MtdRow row;
  row.hausdorff = mtd(gen, truths, DistanceKind::hausdorff);
  row.frechet = mtd(gen, truths, DistanceKind::frechet);
  row.dtw_value = mtd(gen, truths, DistanceKind::dtw);
  return row;
}

// Stream offsets keep the per-map generators of different variants and the
// baseline independent of each other.
inline constexpr std::uint64_t kVariantStreamStride = 1u << 20;
inline constexpr std::uint64_t kBaselineStream = 0xB00000000ULL;

}  // namespace detail

/// Generates `num_per_map` trajectories per test map with one model and
/// scores each against that map's hidden ground truths.
inline VariantEval evaluate_model(const MdnModel& model, const std::string& label,
                                  std::size_t variant_index, const Dataset& test,
                                  const EvalConfig& cfg) {
  VariantEval variant;
  variant.label = label;
  variant.final_train_nll = model.final_train_nll;
  for (std::size_t map_idx = 0; map_idx < test.entries.size(); ++map_idx) {
    const DatasetEntry& entry = test.entries[map_idx];
    Rng rng(derive_seed(cfg.seed, variant_index * detail::kVariantStreamStride + map_idx));
    BatchResult batch = generate_batch(model, entry.grid, cfg.gen, cfg.num_per_map, rng);

    MapEval map_eval;
    map_eval.map_id = entry.map_id;
    map_eval.stats = batch.stats;
    for (const TrajectoryWeights& w : batch.weights) {
      DiscreteTrajectory traj = discretise(w, model.basis, cfg.discretise_points);
      map_eval.rows.push_back(detail::mtd_row(traj, entry.trajectories));
      map_eval.trajectories.push_back(std::move(traj));
    }
    variant.maps.push_back(std::move(map_eval));
  }
  return variant;
}

/// Random-walk baseline scored identically to the model variants.
inline VariantEval evaluate_baseline(const Dataset& test, const EvalConfig& cfg) {
  VariantEval variant;
  variant.label = "random_baseline";
  for (std::size_t map_idx = 0; map_idx < test.entries.size(); ++map_idx) {
    const DatasetEntry& entry = test.entries[map_idx];
    Rng rng(derive_seed(cfg.seed, detail::kBaselineStream + map_idx));
    MapEval map_eval;
    map_eval.map_id = entry.map_id;
    map_eval.stats.requested = cfg.num_per_map;
    map_eval.stats.accepted = cfg.num_per_map;
    map_eval.stats.attempts = cfg.num_per_map;
    for (std::size_t i = 0; i < cfg.num_per_map; ++i) {
      DiscreteTrajectory traj = random_baseline(entry.grid, cfg.discretise_points, rng);
      map_eval.rows.push_back(detail::mtd_row(traj, entry.trajectories));
      map_eval.trajectories.push_back(std::move(traj));
    }
    variant.maps.push_back(std::move(map_eval));
  }
  return variant;
}

struct Aggregate {
  std::size_t row_count = 0;
  double hausdorff_mean = 0.0;
  double frechet_mean = 0.0;
  double dtw_mean = 0.0;
  std::size_t accepted = 0;
  std::uint64_t attempts = 0;

  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts);
  }
};

inline Aggregate aggregate_variant(const VariantEval& variant) {
  Aggregate agg;
  double sh = 0.0, sf = 0.0, sd = 0.0;
  for (const MapEval& m : variant.maps) {
    agg.accepted += m.stats.accepted;
    agg.attempts += m.stats.attempts;
    for (const MtdRow& row : m.rows) {
      sh += row.hausdorff;
      sf += row.frechet;
      sd += row.dtw_value;
      ++agg.row_count;
    }
  }
  if (agg.row_count > 0) {
    const double n = static_cast<double>(agg.row_count);
    agg.hausdorff_mean = sh / n;
    agg.frechet_mean = sf / n;
    agg.dtw_mean = sd / n;
  }
  return agg;
}

namespace detail {

inline nlohmann::json variant_to_json(const VariantEval& variant) {
  using nlohmann::json;
  json maps = json::array();
  for (const MapEval& m : variant.maps) {
    json rows = json::array();
    double sh = 0.0, sf = 0.0, sd = 0.0;
    for (const MtdRow& row : m.rows) {
      rows.push_back({{"mtd_hausdorff", row.hausdorff},
                      {"mtd_frechet", row.frechet},
                      {"mtd_dtw", row.dtw_value}});
      sh += row.hausdorff;
      sf += row.frechet;
      sd += row.dtw_value;
    }
    json entry{{"map_id", m.map_id},
               {"requested", m.stats.requested},
               {"accepted", m.stats.accepted},
               {"attempts", m.stats.attempts},
               {"acceptance_rate", m.stats.acceptance_rate()},
               {"trajectories", std::move(rows)}};
    if (!m.rows.empty()) {
      const double n = static_cast<double>(m.rows.size());
      entry["mean"] = {{"mtd_hausdorff", sh / n},
                       {"mtd_frechet", sf / n},
                       {"mtd_dtw", sd / n}};
    }
    maps.push_back(std::move(entry));
  }

  const Aggregate agg = aggregate_variant(variant);
  json aggregate{{"rows", agg.row_count},
                 {"accepted", agg.accepted},
                 {"attempts", agg.attempts},
                 {"acceptance_rate", agg.acceptance_rate()}};
  if (agg.row_count > 0) {
    aggregate["mtd_hausdorff_mean"] = agg.hausdorff_mean;
    aggregate["mtd_frechet_mean"] = agg.frechet_mean;
    aggregate["mtd_dtw_mean"] = agg.dtw_mean;
  }
  json out{{"label", variant.label}, {"maps", std::move(maps)},
           {"aggregate", std::move(aggregate)}};
  if (std::isfinite(variant.final_train_nll)) out["final_train_nll"] = variant.final_train_nll;
  return out;
}

}  // namespace detail

/// RunReport document: per-map and per-trajectory MTD values for every
/// variant plus the baseline, acceptance statistics, config echo and seed.
/// The timings block is attached only when provided, so reports stay
/// byte-reproducible when timing is turned off.
inline nlohmann::json report_to_json(const EvalOutcome& outcome, const EvalConfig& cfg,
                                     const nlohmann::json& timings = {}) {
  using nlohmann::json;
  json models = json::array();
  for (const VariantEval& variant : outcome.variants)
    models.push_back(detail::variant_to_json(variant));
  json report{{"format_version", 1},
              {"seed", cfg.seed},
              {"config",
               {{"num_per_map", cfg.num_per_map},
                {"discretise_points", cfg.discretise_points},
                {"validity_checks", cfg.gen.num_validity_checks},
                {"max_attempts", cfg.gen.max_attempts}}},
              {"models", std::move(models)},
              {"baseline", detail::variant_to_json(outcome.baseline)}};
  if (!timings.is_null() && !timings.empty()) report["durations_seconds"] = timings;
  return report;
}

}  // namespace octnet
