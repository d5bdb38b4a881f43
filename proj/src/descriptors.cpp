#include "pointpca/descriptors.hpp"

#include <cmath>
#include <stdexcept>

namespace pointpca {

void local_covariance(std::span<const Vec3> neighborhood, Vec3& centroid,
                      Mat3& covariance) {
  if (neighborhood.empty()) {
    throw std::invalid_argument("local_covariance: empty neighborhood");
  }
  const double inv_n = 1.0 / static_cast<double>(neighborhood.size());
  centroid = {0.0, 0.0, 0.0};
  for (const auto& p : neighborhood) centroid += p;
  centroid = centroid * inv_n;

  covariance = Mat3{};
  for (const auto& p : neighborhood) {
    const Vec3 d = p - centroid;
    covariance(0, 0) += d.x * d.x;
    covariance(0, 1) += d.x * d.y;
    covariance(0, 2) += d.x * d.z;
    covariance(1, 1) += d.y * d.y;
    covariance(1, 2) += d.y * d.z;
    covariance(2, 2) += d.z * d.z;
  }
  covariance(0, 0) *= inv_n;
  covariance(0, 1) *= inv_n;
  covariance(0, 2) *= inv_n;
  covariance(1, 1) *= inv_n;
  covariance(1, 2) *= inv_n;
  covariance(2, 2) *= inv_n;
  covariance(1, 0) = covariance(0, 1);
  covariance(2, 0) = covariance(0, 2);
  covariance(2, 1) = covariance(1, 2);
}

std::array<double, kGeomDescriptorCount> geometric_descriptors(
    const EigenSystem& eig, const Vec3& query_point, const Vec3& centroid,
    Eigenentropy entropy_mode) {
  const double l1 = eig.eigenvalues[0];
  const double l2 = eig.eigenvalues[1];
  const double l3 = eig.eigenvalues[2];
  const double sum = l1 + l2 + l3;
  const Vec3& e3 = eig.eigenvectors[2];

  std::array<double, kGeomDescriptorCount> d{};
  d[0] = l1;
  d[1] = l2;
  d[2] = l3;
  d[3] = sum;
  d[4] = (l1 - l2) / (l1 + kEpsilon);  // linearity
  d[5] = (l2 - l3) / (l1 + kEpsilon);  // planarity
  d[6] = l3 / (l1 + kEpsilon);         // sphericity
  d[7] = (l1 - l3) / (l1 + kEpsilon);  // anisotropy
  // Omnivariance: the cube root amplifies rounding noise in eigenvalues
  // that are numerically zero (flat or collinear neighborhoods) to ~1e-5
  // relative scale, so such eigenvalues enter the product as exact zeros.
  const auto solid = [&](double l) { return l > 1e-12 * l1 ? l : 0.0; };
  d[8] = std::cbrt(solid(l1) * solid(l2) * solid(l3));

  double entropy = 0.0;
  if (entropy_mode == Eigenentropy::Normalized) {
    if (sum > kEpsilon) {
      for (double l : eig.eigenvalues) {
        const double ln = l / sum;
        entropy -= ln * std::log(std::max(ln, kEpsilon));
      }
    }
  } else {
    for (double l : eig.eigenvalues) {
      entropy -= l * std::log(std::max(l, kEpsilon));
    }
  }
  d[9] = entropy;

  d[10] = l3 / (sum + kEpsilon);  // surface variation
  d[11] = std::abs(dot(query_point - centroid, e3));  // roughness
  d[12] = 1.0 - std::abs(e3.x);  // parallelity_x
  d[13] = 1.0 - std::abs(e3.y);  // parallelity_y
  d[14] = 1.0 - std::abs(e3.z);  // parallelity_z
  return d;
}

std::vector<DescriptorVector> compute_descriptor_map(
    const PointCloud& cloud, const KdTree& index, double radius,
    const DescriptorConfig& config) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("compute_descriptor_map: radius must be > 0");
  }
  const bool with_color = cloud.has_colors();
  std::vector<DescriptorVector> map(cloud.size());

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cloud.size()); ++i) {
    const Vec3& query = cloud.positions[i];
    const auto neighbors = index.query_radius(query, radius);
    std::vector<Vec3> pts;
    pts.reserve(neighbors.size());
    for (const auto& nb : neighbors) {
      if (!config.include_query_point &&
          nb.index == static_cast<std::uint32_t>(i)) {
        continue;
      }
      pts.push_back(cloud.positions[nb.index]);
    }

    DescriptorVector& dv = map[i];
    if (pts.empty()) {
      // Query point excluded and nothing else in range: treat as singleton.
      pts.push_back(query);
    }
    Vec3 centroid;
    Mat3 cov;
    local_covariance(pts, centroid, cov);
    const EigenSystem eig = eigen_decompose(cov);
    const auto g =
        geometric_descriptors(eig, query, centroid, config.entropy_mode);
    for (int j = 0; j < kGeomDescriptorCount; ++j) dv.d[j] = g[j];
    dv.degenerate = pts.size() < 3 || eig.eigenvalues[0] <= kEpsilon;
    if (with_color) {
      dv.d[kGeomDescriptorCount] =
          textural_descriptor(cloud.colors[i], config.color_space);
    }
  }
  return map;
}

}  // namespace pointpca
