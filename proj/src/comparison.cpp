#include "pointpca/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointpca {

CompareMethod compare_method_from_string(const std::string& name) {
  if (name == "ad" || name == "AD") return CompareMethod::AD;
  if (name == "sd" || name == "SD") return CompareMethod::SD;
  if (name == "rd1" || name == "RD1") return CompareMethod::RD1;
  if (name == "rd2" || name == "RD2") return CompareMethod::RD2;
  if (name == "rd3" || name == "RD3") return CompareMethod::RD3;
  if (name == "rd4" || name == "RD4") return CompareMethod::RD4;
  throw std::invalid_argument("unknown comparison method '" + name + "'");
}

std::string to_string(CompareMethod method) {
  switch (method) {
    case CompareMethod::AD:
      return "ad";
    case CompareMethod::SD:
      return "sd";
    case CompareMethod::RD1:
      return "rd1";
    case CompareMethod::RD2:
      return "rd2";
    case CompareMethod::RD3:
      return "rd3";
    case CompareMethod::RD4:
      return "rd4";
  }
  return "?";
}

double compare_features(double a, double b, CompareMethod method) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("compare_features: non-finite input");
  }
  switch (method) {
    case CompareMethod::AD:
      return std::abs(a - b);
    case CompareMethod::SD: {
      const double d = a - b;
      return d * d;
    }
    case CompareMethod::RD1:
      return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + kEpsilon);
    case CompareMethod::RD2:
      return 2.0 * a * b / (a * a * b * b + kEpsilon);
    case CompareMethod::RD3:
      return std::abs(a - b) / (std::abs(a + b) + kEpsilon);
    case CompareMethod::RD4:
      // The guard keeps RD4 total for equal operands.
      return std::max(std::abs(a), std::abs(b)) / (std::abs(a - b) + kEpsilon);
  }
  throw std::logic_error("compare_features: bad method");
}

ErrorMap error_map(const std::vector<FeatureVector>& features_eval,
                   const std::vector<FeatureVector>& features_ref,
                   const std::vector<std::uint32_t>& corr,
                   CompareMethod method) {
  if (corr.size() != features_eval.size()) {
    throw std::invalid_argument("error_map: correspondence size mismatch");
  }
  ErrorMap map;
  map.rows.resize(features_eval.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(corr.size()); ++i) {
    const FeatureVector& ref = features_ref.at(corr[i]);
    const FeatureVector& eval = features_eval[i];
    for (int j = 0; j < kFeatureCount; ++j) {
      map.rows[i][j] = compare_features(ref[j], eval[j], method);
    }
  }
  return map;
}

FeatureVector pool(const ErrorMap& errors) {
  if (errors.rows.empty()) throw std::invalid_argument("pool: empty error map");
  FeatureVector s{};
  for (const auto& row : errors.rows) {
    for (int j = 0; j < kFeatureCount; ++j) s[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(errors.rows.size());
  for (int j = 0; j < kFeatureCount; ++j) s[j] *= inv_n;
  return s;
}

FeatureVector symmetric_predictors(const FeatureVector& dir_ba,
                                   const FeatureVector& dir_ab) {
  FeatureVector s{};
  for (int j = 0; j < kFeatureCount; ++j) s[j] = std::max(dir_ba[j], dir_ab[j]);
  return s;
}

PredictorResult compute_predictors(const PointCloud& reference,
                                   const PointCloud& distorted,
                                   const PipelineConfig& config) {
  const PointCloud ref = fuse_duplicates(reference);
  const PointCloud dist = fuse_duplicates(distorted);
  if (ref.positions.empty() || dist.positions.empty()) {
    throw CloudError("compute_predictors: empty cloud");
  }

  double radius;
  if (config.fixed_radius) {
    radius = *config.fixed_radius;
  } else {
    radius = config.radius_factor * bounding_extent(ref).max_side;
  }
  if (!(radius > 0.0)) {
    throw CloudError(
        "compute_predictors: degenerate support radius (single-point or flat "
        "reference extent)");
  }

  PredictorResult result;
  result.radius = radius;
  result.has_texture = ref.has_colors() && dist.has_colors();

  DescriptorConfig dcfg{config.color_space, config.entropy_mode,
                        config.include_query_point};
  const KdTree ref_index(ref);
  const KdTree dist_index(dist);

  const auto ref_desc = compute_descriptor_map(ref, ref_index, radius, dcfg);
  const auto dist_desc = compute_descriptor_map(dist, dist_index, radius, dcfg);
  const auto ref_feat = compute_feature_map(ref, ref_index, ref_desc, config.k);
  const auto dist_feat =
      compute_feature_map(dist, dist_index, dist_desc, config.k);

  // Each direction evaluates one cloud against the other via its own
  // nearest-neighbor correspondence.
  const auto corr_dist_to_ref = correspondence(dist, ref_index);
  const auto corr_ref_to_dist = correspondence(ref, dist_index);

  result.dist_to_ref =
      pool(error_map(dist_feat, ref_feat, corr_dist_to_ref, config.method));
  result.ref_to_dist =
      pool(error_map(ref_feat, dist_feat, corr_ref_to_dist, config.method));
  result.symmetric =
      symmetric_predictors(result.dist_to_ref, result.ref_to_dist);
  return result;
}

}  // namespace pointpca
