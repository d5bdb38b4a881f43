#pragma once

#include <array>
#include <span>
#include <vector>

#include "pointpca/descriptors.hpp"

namespace pointpca {

inline constexpr int kFeatureCount = 32;

/// Fixed feature layout (0-based): index j in [0,16) is the neighborhood
/// mean of descriptor j, index j in [16,32) the population standard
/// deviation of descriptor j-16. Descriptor 15 is the textural slot.
/// Weight files name this convention "pointpca-v1" (1-based there).
using FeatureVector = std::array<double, kFeatureCount>;

inline constexpr bool is_texture_feature(int j) {
  return j == kGeomDescriptorCount ||
         j == kDescriptorCount + kGeomDescriptorCount;
}

/// Componentwise mean and population standard deviation (1/n) over the
/// given descriptor rows.
void statistical_features(
    std::span<const DescriptorVector> descriptor_rows,
    std::array<double, kDescriptorCount>& mu,
    std::array<double, kDescriptorCount>& sigma);

/// Per-point features over k-nn neighborhoods (query point included).
/// Clouds smaller than k use all available points. OpenMP-parallel.
std::vector<FeatureVector> compute_feature_map(
    const PointCloud& cloud, const KdTree& index,
    const std::vector<DescriptorVector>& descriptor_map, std::size_t k);

}  // namespace pointpca
