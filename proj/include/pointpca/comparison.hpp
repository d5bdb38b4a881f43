#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pointpca/features.hpp"

namespace pointpca {

enum class CompareMethod { AD, SD, RD1, RD2, RD3, RD4 };

CompareMethod compare_method_from_string(const std::string& name);
std::string to_string(CompareMethod method);

/// Pointwise comparison of two feature values. RD1 is the default relative
/// difference; RD2/RD4 are similarity-flavored and reported raw.
double compare_features(double phi_ref, double phi_dist, CompareMethod method);

/// |evaluated| x 32 matrix of per-point, per-feature comparison values.
struct ErrorMap {
  std::vector<FeatureVector> rows;
};

ErrorMap error_map(const std::vector<FeatureVector>& features_eval,
                   const std::vector<FeatureVector>& features_ref,
                   const std::vector<std::uint32_t>& corr,
                   CompareMethod method);

/// Directional predictors: per-column arithmetic mean of the error map,
/// accumulated in fixed index order so runs are bit-stable.
FeatureVector pool(const ErrorMap& errors);

/// Componentwise max of the two directional predictor vectors.
FeatureVector symmetric_predictors(const FeatureVector& dir_ba,
                                   const FeatureVector& dir_ab);

struct PipelineConfig {
  double radius_factor = 0.01;          // r = radius_factor * B_R
  std::optional<double> fixed_radius;   // overrides radius_factor when set
  std::size_t k = 25;
  CompareMethod method = CompareMethod::RD1;
  ColorSpace color_space = ColorSpace::Y;
  Eigenentropy entropy_mode = Eigenentropy::Normalized;
  bool include_query_point = true;
};

struct PredictorResult {
  FeatureVector symmetric{};   // componentwise max over both directions
  FeatureVector dist_to_ref{}; // distorted evaluated against reference
  FeatureVector ref_to_dist{}; // reference evaluated against distorted
  double radius = 0.0;
  bool has_texture = false;    // texture slots are zero when false
};

/// Full pipeline: fuse both clouds, derive the support radius from the
/// reference extent, compute descriptors and statistical features for both,
/// compare along both correspondence directions, pool, and take the max.
PredictorResult compute_predictors(const PointCloud& reference,
                                   const PointCloud& distorted,
                                   const PipelineConfig& config);

}  // namespace pointpca
