#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "pointpca/color.hpp"
#include "pointpca/eigen3.hpp"
#include "pointpca/kd_tree.hpp"
#include "pointpca/point_cloud.hpp"

namespace pointpca {

/// Guard constant for divisions and logarithms: the machine rounding error
/// for double-precision floating point.
inline constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

inline constexpr int kGeomDescriptorCount = 15;
inline constexpr int kDescriptorCount = 16;  // 15 geometric + 1 textural

/// Per-point descriptors: slots 0..14 are the eigenvalue-based geometric
/// descriptors, slot 15 the textural one (unused when the cloud has no
/// color). `degenerate` marks neighborhoods of fewer than 3 points or with
/// a vanishing leading eigenvalue; their guarded values still participate
/// downstream.
struct DescriptorVector {
  std::array<double, kDescriptorCount> d{};
  bool degenerate = false;
};

/// Population covariance (1/n) and centroid of a neighborhood.
void local_covariance(std::span<const Vec3> neighborhood, Vec3& centroid,
                      Mat3& covariance);

/// Whether eigenentropy normalizes the eigenvalues to unit sum before the
/// -sum(l ln l) evaluation. Normalized is the shipped default; raw follows
/// the formula as printed.
enum class Eigenentropy { Normalized, Raw };

std::array<double, kGeomDescriptorCount> geometric_descriptors(
    const EigenSystem& eig, const Vec3& query_point, const Vec3& centroid,
    Eigenentropy entropy_mode = Eigenentropy::Normalized);

struct DescriptorConfig {
  ColorSpace color_space = ColorSpace::Y;
  Eigenentropy entropy_mode = Eigenentropy::Normalized;
  bool include_query_point = true;  // exclusion switch for sensitivity tests
};

/// Descriptors for every point from its radius neighborhood; the textural
/// slot is filled from the point's own color when the cloud carries one.
/// OpenMP-parallel across points.
std::vector<DescriptorVector> compute_descriptor_map(
    const PointCloud& cloud, const KdTree& index, double radius,
    const DescriptorConfig& config = {});

}  // namespace pointpca
