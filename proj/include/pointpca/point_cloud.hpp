#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pointpca/geometry.hpp"

namespace pointpca {

/// Point positions with optional per-point RGB colors on a 0-255 scale.
/// Colors are kept as reals; duplicate fusion averages them without
/// re-quantization. Immutable by convention after construction.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;  // empty when the input carries no color

  bool has_colors() const { return !colors.empty(); }
  std::size_t size() const { return positions.size(); }
};

struct BoundingExtent {
  Vec3 min_corner;
  Vec3 max_corner;
  double max_side = 0.0;
};

class CloudError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Removes exactly-equal duplicate positions, averaging the colors of each
/// duplicate group. First-occurrence order is preserved.
PointCloud fuse_duplicates(const PointCloud& cloud);

BoundingExtent bounding_extent(const PointCloud& cloud);

}  // namespace pointpca
