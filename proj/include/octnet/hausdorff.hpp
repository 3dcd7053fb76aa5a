#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "octnet/geometry.hpp"
#include "octnet/linalg.hpp"

namespace octnet {

/// Length scale of the distance substitute kernel. The similarity is
/// exp(-d^2 / (2 * length_scale_h)) with the length scale entering
/// unsquared, matching the formula the value 50 was reported for.
struct KernelConfig {
  double length_scale_h = 50.0;
};

/// max over a in A of min over b in B of ||a - b||.
///
/// The scan keeps squared distances and skips a point as soon as some b is
/// closer than the current max; that prunes most of the inner loop without
/// changing the result, since the final value is still the exact
/// sqrt(dx*dx + dy*dy) of one specific pair.
inline double one_sided_hausdorff(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("one_sided_hausdorff: empty point set");
  double max_sq = 0.0;
  for (const Point2& pa : a) {
    double min_sq = std::numeric_limits<double>::infinity();
    for (const Point2& pb : b) {
      const double d = point_distance_sq(pa, pb);
      if (d < min_sq) {
        min_sq = d;
        if (min_sq <= max_sq) break;  // cannot raise the max
      }
    }
    if (min_sq > max_sq) max_sq = min_sq;
  }
  return std::sqrt(max_sq);
}

/// (one_sided(A,B) + one_sided(B,A)) / 2.
inline double symmetric_hausdorff(const PointSet& a, const PointSet& b) {
  return 0.5 * (one_sided_hausdorff(a, b) + one_sided_hausdorff(b, a));
}

/// Distance substitute kernel value in (0, 1].
inline double hausdorff_kernel(const PointSet& a, const PointSet& b, const KernelConfig& cfg) {
  if (!(cfg.length_scale_h > 0.0))
    throw std::invalid_argument("hausdorff_kernel: length_scale_h must be positive");
  const double d = symmetric_hausdorff(a, b);
  return std::exp(-(d * d) / (2.0 * cfg.length_scale_h));
}

/// Row of the similarity Gram matrix: the kernel evaluated between one map
/// and every reference (training) map, in reference order.
struct SimilarityFeature {
  std::vector<double> values;
  std::vector<std::string> reference_ids;
};

/// Full Gram matrix of the similarity function, one feature row per map.
/// The kernel is evaluated once per unordered pair, so the matrix is
/// symmetric bitwise and the diagonal is exactly 1.
inline std::vector<SimilarityFeature> gram_features(
    const std::vector<PointSet>& maps, const KernelConfig& cfg,
    const std::vector<std::string>& ids = {}) {
  if (maps.empty()) throw std::invalid_argument("gram_features: no maps");
  const std::size_t n = maps.size();
  std::vector<std::string> ref_ids = ids;
  if (ref_ids.empty())
    for (std::size_t i = 0; i < n; ++i) ref_ids.push_back(std::to_string(i));
  if (ref_ids.size() != n)
    throw std::invalid_argument("gram_features: id count mismatch");

  Matrix gram(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    gram(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = hausdorff_kernel(maps[i], maps[j], cfg);
      gram(i, j) = s;
      gram(j, i) = s;
    }
  }

  std::vector<SimilarityFeature> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i].values.assign(gram.row_ptr(i), gram.row_ptr(i) + n);
    features[i].reference_ids = ref_ids;
  }
  return features;
}

/// Similarity feature of a queried map against the frozen training set.
inline SimilarityFeature query_feature(const PointSet& new_map,
                                       const std::vector<PointSet>& training_maps,
                                       const KernelConfig& cfg,
                                       const std::vector<std::string>& ids = {}) {
  if (training_maps.empty())
    throw std::invalid_argument("query_feature: no training maps");
  SimilarityFeature feature;
  feature.values.reserve(training_maps.size());
  for (const PointSet& ref : training_maps)
    feature.values.push_back(hausdorff_kernel(new_map, ref, cfg));
  if (ids.empty())
    for (std::size_t i = 0; i < training_maps.size(); ++i)
      feature.reference_ids.push_back(std::to_string(i));
  else
    feature.reference_ids = ids;
  return feature;
}

}  // namespace octnet
