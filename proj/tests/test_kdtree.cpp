#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "pointpca/kd_tree.hpp"
#include "test_support.hpp"

using namespace pointpca;

namespace {

// Linear-scan oracle with the same ordering contract: non-decreasing
// distance, ties by lower index.
std::vector<Neighbor> brute_knn(const PointCloud& cloud, const Vec3& q,
                                std::size_t k) {
  std::vector<Neighbor> all;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    all.push_back({i, std::sqrt(squared_distance(cloud.positions[i], q))});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance
                                    : a.index < b.index;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

std::vector<Neighbor> brute_radius(const PointCloud& cloud, const Vec3& q,
                                   double r) {
  std::vector<Neighbor> all;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const double d = std::sqrt(squared_distance(cloud.positions[i], q));
    if (d <= r) all.push_back({i, d});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance
                                    : a.index < b.index;
  });
  return all;
}

}  // namespace

TEST_CASE("single-point tree") {
  PointCloud cloud;
  cloud.positions = {{1, 2, 3}};
  const KdTree tree(cloud);
  const auto nn = tree.query_knn({0, 0, 0}, 5);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].index == 0);
  CHECK(nn[0].distance == doctest::Approx(std::sqrt(14.0)));

  CHECK(tree.query_radius({1, 2, 3}, 0.5).size() == 1);
  CHECK(tree.query_radius({0, 0, 0}, 0.5).empty());
}

TEST_CASE("knn tie-break picks the lower index") {
  PointCloud cloud;
  // Points 1 and 2 are equidistant from the origin.
  cloud.positions = {{5, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 3, 0}};
  const KdTree tree(cloud);
  const auto nn = tree.query_knn({0, 0, 0}, 1);
  REQUIRE(nn.size() == 1);
  CHECK(nn[0].index == 1);

  const auto nn2 = tree.query_knn({0, 0, 0}, 2);
  REQUIRE(nn2.size() == 2);
  CHECK(nn2[0].index == 1);
  CHECK(nn2[1].index == 2);
}

TEST_CASE("radius boundary is inclusive") {
  PointCloud cloud;
  cloud.positions = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const KdTree tree(cloud);
  const auto within = tree.query_radius({0, 0, 0}, 1.0);
  REQUIRE(within.size() == 2);
  CHECK(within[1].index == 1);
}

TEST_CASE("knn matches brute force on random clouds") {
  const PointCloud cloud = testing::random_cloud(200, 77, false);
  const KdTree tree(cloud);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 q{u(rng), u(rng), u(rng)};
    for (std::size_t k : {1u, 3u, 25u, 200u, 500u}) {
      const auto got = tree.query_knn(q, k);
      const auto want = brute_knn(cloud, q, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].index == want[i].index);
        CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("radius query matches brute force on random clouds") {
  const PointCloud cloud = testing::random_cloud(200, 78, false);
  const KdTree tree(cloud);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 q{u(rng), u(rng), u(rng)};
    for (double r : {0.05, 0.2, 0.6, 2.0}) {
      const auto got = tree.query_radius(q, r);
      const auto want = brute_radius(cloud, q, r);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].index == want[i].index);
      }
    }
  }
}

TEST_CASE("query results are independent of input permutation") {
  const PointCloud cloud = testing::random_cloud(120, 31, false);
  PointCloud shuffled = cloud;
  std::vector<std::uint32_t> perm(cloud.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.positions[i] = cloud.positions[perm[i]];
  }

  const KdTree a(cloud);
  const KdTree b(shuffled);
  const Vec3 q{0.4, 0.4, 0.4};
  const auto na = a.query_knn(q, 10);
  const auto nb = b.query_knn(q, 10);
  REQUIRE(na.size() == nb.size());
  for (std::size_t i = 0; i < na.size(); ++i) {
    // Same physical points even though indices differ.
    CHECK(cloud.positions[na[i].index] == shuffled.positions[nb[i].index]);
  }
}

TEST_CASE("growing the radius only adds neighbors") {
  const PointCloud cloud = testing::random_cloud(150, 44, false);
  const KdTree tree(cloud);
  const Vec3 q{0.5, 0.5, 0.5};
  const auto small = tree.query_radius(q, 0.2);
  const auto large = tree.query_radius(q, 0.4);
  CHECK(small.size() <= large.size());
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(small[i].index == large[i].index);  // shared sorted prefix
  }
}

TEST_CASE("correspondence of a cloud with itself is the identity") {
  const PointCloud cloud = testing::random_cloud(80, 55, false);
  const KdTree tree(cloud);
  const auto corr = correspondence(cloud, tree);
  REQUIRE(corr.size() == cloud.size());
  for (std::uint32_t i = 0; i < corr.size(); ++i) CHECK(corr[i] == i);
}

TEST_CASE("correspondence is directional") {
  PointCloud a;
  a.positions = {{0, 0, 0}, {10, 0, 0}};
  PointCloud b;
  b.positions = {{1, 0, 0}, {2, 0, 0}, {9, 0, 0}};
  const KdTree tree_a(a);
  const KdTree tree_b(b);

  const auto b_to_a = correspondence(b, tree_a);
  REQUIRE(b_to_a.size() == 3);
  CHECK(b_to_a[0] == 0);
  CHECK(b_to_a[1] == 0);
  CHECK(b_to_a[2] == 1);

  const auto a_to_b = correspondence(a, tree_b);
  REQUIRE(a_to_b.size() == 2);
  CHECK(a_to_b[0] == 0);
  CHECK(a_to_b[1] == 2);  // point 1 of b is never anyone's nearest neighbor
}
