#include "pointpca/point_cloud.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>

namespace pointpca {

namespace {

struct PosKey {
  std::array<std::uint64_t, 3> bits;
  bool operator==(const PosKey&) const = default;
};

PosKey make_key(const Vec3& p) {
  PosKey k;
  std::memcpy(k.bits.data(), &p.x, sizeof(double) * 3);
  return k;
}

struct PosKeyHash {
  std::size_t operator()(const PosKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : k.bits) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud fuse_duplicates(const PointCloud& cloud) {
  PointCloud out;
  out.positions.reserve(cloud.size());
  const bool with_color = cloud.has_colors();
  if (with_color) out.colors.reserve(cloud.size());

  std::unordered_map<PosKey, std::size_t, PosKeyHash> seen;
  seen.reserve(cloud.size() * 2);
  std::vector<std::size_t> counts;

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto key = make_key(cloud.positions[i]);
    auto [it, inserted] = seen.emplace(key, out.positions.size());
    if (inserted) {
      out.positions.push_back(cloud.positions[i]);
      if (with_color) out.colors.push_back(cloud.colors[i]);
      counts.push_back(1);
    } else {
      const std::size_t slot = it->second;
      ++counts[slot];
      if (with_color) out.colors[slot] += cloud.colors[i];
    }
  }
  if (with_color) {
    for (std::size_t i = 0; i < out.colors.size(); ++i) {
      out.colors[i] = out.colors[i] * (1.0 / static_cast<double>(counts[i]));
    }
  }
  return out;
}

BoundingExtent bounding_extent(const PointCloud& cloud) {
  if (cloud.positions.empty()) {
    throw CloudError("bounding_extent: empty cloud");
  }
  BoundingExtent e;
  e.min_corner = e.max_corner = cloud.positions.front();
  for (const auto& p : cloud.positions) {
    for (int a = 0; a < 3; ++a) {
      e.min_corner[a] = std::min(e.min_corner[a], p[a]);
      e.max_corner[a] = std::max(e.max_corner[a], p[a]);
    }
  }
  e.max_side = 0.0;
  for (int a = 0; a < 3; ++a) {
    e.max_side = std::max(e.max_side, e.max_corner[a] - e.min_corner[a]);
  }
  return e;
}

}  // namespace pointpca
