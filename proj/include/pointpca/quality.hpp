#pragma once

#include <array>
#include <string>

#include "pointpca/comparison.hpp"

namespace pointpca {

enum class Domain { Geometry, Texture, GeometryTexture };

Domain domain_from_string(const std::string& name);
std::string to_string(Domain domain);

/// Simplex weights over a subset of the 32 predictors. Selected weights are
/// non-negative and sum to one.
struct WeightVector {
  std::array<double, kFeatureCount> weights{};
  std::array<bool, kFeatureCount> selected{};

  double sum() const;
  int selected_count() const;
};

struct QualityScore {
  double value = 0.0;
  std::string domain;  // "g", "t", "g+t" or "blend"
};

/// Weighted combination: sum(w*s) / sum(w).
QualityScore combine(const FeatureVector& predictors,
                     const WeightVector& weights, const std::string& domain);

/// omega * q_g + (1 - omega) * q_t, omega in [0,1].
QualityScore blend(const QualityScore& q_g, const QualityScore& q_t,
                   double omega);

/// Equal weights over the domain's predictor set. Requesting the texture
/// domain on a colorless pair throws.
WeightVector default_weights(Domain domain, bool texture_available);

/// Line-oriented weight file: "# layout: pointpca-v1" followed by
/// 1-based "j w_j" pairs; omitted indices mean weight zero. On load the
/// simplex constraints are validated; small drift is renormalized unless
/// `strict`, in which case it is rejected.
WeightVector load_weights(const std::string& path, bool strict = false);
void save_weights(const WeightVector& weights, const std::string& path);

}  // namespace pointpca
