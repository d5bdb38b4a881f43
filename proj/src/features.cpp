#include "pointpca/features.hpp"

#include <cmath>
#include <stdexcept>

namespace pointpca {

void statistical_features(std::span<const DescriptorVector> descriptor_rows,
                          std::array<double, kDescriptorCount>& mu,
                          std::array<double, kDescriptorCount>& sigma) {
  if (descriptor_rows.empty()) {
    throw std::invalid_argument("statistical_features: empty row list");
  }
  const double inv_n = 1.0 / static_cast<double>(descriptor_rows.size());
  mu.fill(0.0);
  sigma.fill(0.0);
  for (const auto& row : descriptor_rows) {
    for (int j = 0; j < kDescriptorCount; ++j) mu[j] += row.d[j];
  }
  for (int j = 0; j < kDescriptorCount; ++j) mu[j] *= inv_n;
  for (const auto& row : descriptor_rows) {
    for (int j = 0; j < kDescriptorCount; ++j) {
      const double dev = row.d[j] - mu[j];
      sigma[j] += dev * dev;
    }
  }
  for (int j = 0; j < kDescriptorCount; ++j) {
    sigma[j] = std::sqrt(sigma[j] * inv_n);
  }
}

std::vector<FeatureVector> compute_feature_map(
    const PointCloud& cloud, const KdTree& index,
    const std::vector<DescriptorVector>& descriptor_map, std::size_t k) {
  if (k < 1) throw std::invalid_argument("compute_feature_map: k must be >= 1");
  if (descriptor_map.size() != cloud.size()) {
    throw std::invalid_argument(
        "compute_feature_map: descriptor map not aligned with cloud");
  }
  std::vector<FeatureVector> features(cloud.size());

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cloud.size()); ++i) {
    const auto neighbors = index.query_knn(cloud.positions[i], k);
    std::vector<DescriptorVector> rows;
    rows.reserve(neighbors.size());
    for (const auto& nb : neighbors) rows.push_back(descriptor_map[nb.index]);

    std::array<double, kDescriptorCount> mu, sigma;
    statistical_features(rows, mu, sigma);
    for (int j = 0; j < kDescriptorCount; ++j) {
      features[i][j] = mu[j];
      features[i][kDescriptorCount + j] = sigma[j];
    }
  }
  return features;
}

}  // namespace pointpca
