#pragma once

#include <cstdint>
#include <vector>

#include "pointpca/point_cloud.hpp"

namespace pointpca {

struct Neighbor {
  std::uint32_t index;  // index into the source cloud
  double distance;      // Euclidean distance to the query
};

/// Exact kd-tree over a cloud's positions. Immutable after construction;
/// concurrent queries are safe. Results are sorted by non-decreasing
/// distance with ties broken by lower point index.
class KdTree {
 public:
  explicit KdTree(const PointCloud& cloud);

  /// The min(k, n) nearest points to `query`, k >= 1.
  std::vector<Neighbor> query_knn(const Vec3& query, std::size_t k) const;

  /// All points within distance <= r (boundary inclusive), r > 0.
  std::vector<Neighbor> query_radius(const Vec3& query, double r) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    // Leaf when count > 0: [begin, begin+count) into order_.
    // Internal when count == 0: children at left/right, split plane below.
    std::uint32_t begin = 0;
    std::uint32_t count = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  template <typename Visitor>
  void traverse(std::int32_t node, const Vec3& query, Visitor& visitor) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// For every point of `evaluated`, the index of its nearest neighbor in the
/// cloud the index was built over. Ties broken by lower reference index.
std::vector<std::uint32_t> correspondence(const PointCloud& evaluated,
                                          const KdTree& reference_index);

}  // namespace pointpca
