#include "pointpca/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace pointpca {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}

KdTree::KdTree(const PointCloud& cloud) : points_(cloud.positions) {
  if (points_.empty()) throw CloudError("KdTree: empty cloud");
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / kLeafSize + 8);
  root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].count = end - begin;
    return id;
  }

  // Split on the widest axis at the median.
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visitor>
void KdTree::traverse(std::int32_t node, const Vec3& query,
                      Visitor& visitor) const {
  const Node& n = nodes_[node];
  if (n.count > 0) {
    for (std::uint32_t i = n.begin; i < n.begin + n.count; ++i) {
      const std::uint32_t idx = order_[i];
      visitor.visit(idx, squared_distance(points_[idx], query));
    }
    return;
  }
  const double diff = query[n.axis] - n.split;
  const std::int32_t near = diff < 0.0 ? n.left : n.right;
  const std::int32_t far = diff < 0.0 ? n.right : n.left;
  traverse(near, query, visitor);
  if (diff * diff <= visitor.prune_radius_sq()) {
    traverse(far, query, visitor);
  }
}

namespace {

// Ordering on (squared distance, index): used both for the knn heap and for
// the final sorted output, so the lower-index tie-break is uniform.
struct HeapEntry {
  double dist_sq;
  std::uint32_t index;
  bool operator<(const HeapEntry& o) const {
    if (dist_sq != o.dist_sq) return dist_sq < o.dist_sq;
    return index < o.index;
  }
};

struct KnnVisitor {
  std::size_t k;
  std::priority_queue<HeapEntry> heap;  // max-heap; top is the worst kept

  void visit(std::uint32_t idx, double d2) {
    HeapEntry e{d2, idx};
    if (heap.size() < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
  }
  double prune_radius_sq() const {
    if (heap.size() < k) return std::numeric_limits<double>::infinity();
    return heap.top().dist_sq;
  }
};

struct RadiusVisitor {
  double r_sq;
  std::vector<HeapEntry> hits;

  void visit(std::uint32_t idx, double d2) {
    if (d2 <= r_sq) hits.push_back({d2, idx});
  }
  double prune_radius_sq() const { return r_sq; }
};

}  // namespace

std::vector<Neighbor> KdTree::query_knn(const Vec3& query,
                                        std::size_t k) const {
  if (k < 1) throw CloudError("query_knn: k must be >= 1");
  KnnVisitor v{std::min(k, points_.size()), {}};
  traverse(root_, query, v);
  std::vector<Neighbor> out(v.heap.size());
  for (auto i = out.size(); i-- > 0;) {
    const auto& e = v.heap.top();
    out[i] = {e.index, std::sqrt(e.dist_sq)};
    v.heap.pop();
  }
  return out;
}

std::vector<Neighbor> KdTree::query_radius(const Vec3& query, double r) const {
  if (!(r > 0.0)) throw CloudError("query_radius: r must be > 0");
  RadiusVisitor v{r * r, {}};
  traverse(root_, query, v);
  std::sort(v.hits.begin(), v.hits.end());
  std::vector<Neighbor> out(v.hits.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {v.hits[i].index, std::sqrt(v.hits[i].dist_sq)};
  }
  return out;
}

std::vector<std::uint32_t> correspondence(const PointCloud& evaluated,
                                          const KdTree& reference_index) {
  if (evaluated.positions.empty()) {
    throw CloudError("correspondence: empty evaluated cloud");
  }
  std::vector<std::uint32_t> map(evaluated.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(evaluated.size());
       ++i) {
    map[i] = reference_index.query_knn(evaluated.positions[i], 1)[0].index;
  }
  return map;
}

}  // namespace pointpca
