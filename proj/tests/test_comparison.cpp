#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pointpca/comparison.hpp"
#include "pointpca/reference_impl.hpp"
#include "test_support.hpp"

using namespace pointpca;

TEST_CASE("compare_features on hand-computed pairs") {
  // Relative difference: |a - b| / (max(|a|, |b|) + eps).
  CHECK(compare_features(1.0, 1.0, CompareMethod::RD1) ==
        doctest::Approx(0.0));
  CHECK(compare_features(2.0, 1.0, CompareMethod::RD1) ==
        doctest::Approx(0.5));
  CHECK(compare_features(0.0, 0.0, CompareMethod::RD1) == 0.0);
  CHECK(compare_features(-1.0, 1.0, CompareMethod::RD1) ==
        doctest::Approx(2.0));

  CHECK(compare_features(2.0, 1.0, CompareMethod::AD) == doctest::Approx(1.0));
  CHECK(compare_features(1.0, 2.0, CompareMethod::AD) == doctest::Approx(1.0));
  CHECK(compare_features(3.0, 1.0, CompareMethod::SD) == doctest::Approx(4.0));

  // |a - b| / (|a| + |b| + eps).
  CHECK(compare_features(3.0, 1.0, CompareMethod::RD3) ==
        doctest::Approx(0.5));

  // Similarity-flavored: 2ab / (a^2 b^2 + eps).
  CHECK(compare_features(1.0, 1.0, CompareMethod::RD2) ==
        doctest::Approx(2.0));
  CHECK(compare_features(2.0, 3.0, CompareMethod::RD2) ==
        doctest::Approx(12.0 / 36.0));

  // max(|a|, |b|) / (|a - b| + eps); the guard keeps equal operands finite.
  CHECK(compare_features(2.0, 4.0, CompareMethod::RD4) ==
        doctest::Approx(2.0));
  CHECK(compare_features(4.0, 2.0, CompareMethod::RD4) ==
        doctest::Approx(2.0));
  CHECK(compare_features(1.0, 1.0, CompareMethod::RD4) ==
        doctest::Approx(1.0 / 2.220446049250313e-16));

  CHECK_THROWS(compare_features(std::nan(""), 1.0, CompareMethod::RD1));
}

TEST_CASE("method name round trips") {
  for (auto m : {CompareMethod::AD, CompareMethod::SD, CompareMethod::RD1,
                 CompareMethod::RD2, CompareMethod::RD3, CompareMethod::RD4}) {
    CHECK(compare_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS(compare_method_from_string("nope"));
}

TEST_CASE("relative difference stays in [0, 2] and is scale invariant") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double a = u(rng), b = u(rng);
    const double v = compare_features(a, b, CompareMethod::RD1);
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
    // Same sign stays within [0, 1].
    const double vs =
        compare_features(std::abs(a), std::abs(b), CompareMethod::RD1);
    CHECK(vs <= 1.0);
    // Positive rescaling cancels.
    CHECK(compare_features(7.0 * a, 7.0 * b, CompareMethod::RD1) ==
          doctest::Approx(v).epsilon(1e-12));
    CHECK(compare_features(7.0 * a, 7.0 * b, CompareMethod::RD3) ==
          doctest::Approx(compare_features(a, b, CompareMethod::RD3))
              .epsilon(1e-12));
    // Symmetry in the arguments.
    CHECK(compare_features(b, a, CompareMethod::RD1) ==
          doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("error_map compares each evaluated row with its correspondent") {
  std::vector<FeatureVector> ref(2), eval(3);
  ref[0].fill(1.0);
  ref[1].fill(2.0);
  eval[0].fill(1.0);
  eval[1].fill(4.0);
  eval[2].fill(3.0);
  const std::vector<std::uint32_t> corr = {0, 1, 1};
  const ErrorMap em = error_map(eval, ref, corr, CompareMethod::RD1);
  REQUIRE(em.rows.size() == 3);
  CHECK(em.rows[0][0] == doctest::Approx(0.0));
  CHECK(em.rows[1][0] == doctest::Approx(0.5));   // |4-2|/4
  CHECK(em.rows[2][0] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("pool is the column mean in fixed order") {
  ErrorMap em;
  em.rows.resize(3);
  em.rows[0].fill(0.0);
  em.rows[1].fill(1.0);
  em.rows[2].fill(2.0);
  em.rows[2][5] = 8.0;
  const FeatureVector p = pool(em);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[5] == doctest::Approx(3.0));
}

TEST_CASE("symmetric predictors take the componentwise max") {
  FeatureVector a{}, b{};
  a[0] = 1.0;
  b[0] = 2.0;
  a[7] = 5.0;
  b[7] = -1.0;
  const FeatureVector s = symmetric_predictors(a, b);
  CHECK(s[0] == 2.0);
  CHECK(s[7] == 5.0);
  CHECK(s[1] == 0.0);
}

TEST_CASE("identical clouds produce exactly zero predictors") {
  const PointCloud cloud = testing::random_cloud(120, 90);
  PipelineConfig cfg;
  cfg.radius_factor = 0.2;
  cfg.k = 9;
  const PredictorResult r = compute_predictors(cloud, cloud, cfg);
  CHECK(r.has_texture);
  for (int j = 0; j < kFeatureCount; ++j) {
    CHECK(r.symmetric[j] == 0.0);  // exact: same inputs, same arithmetic
  }
}

TEST_CASE("duplicate points are fused before the pipeline runs") {
  PointCloud cloud = testing::random_cloud(60, 91);
  PointCloud doubled = cloud;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    doubled.positions.push_back(cloud.positions[i]);
    doubled.colors.push_back(cloud.colors[i]);
  }
  PipelineConfig cfg;
  cfg.radius_factor = 0.4;
  cfg.k = 7;
  const PredictorResult a = compute_predictors(cloud, cloud, cfg);
  const PredictorResult b = compute_predictors(doubled, cloud, cfg);
  for (int j = 0; j < kFeatureCount; ++j) {
    CHECK(b.symmetric[j] == doctest::Approx(a.symmetric[j]).epsilon(1e-12));
  }
  CHECK(b.radius == doctest::Approx(a.radius));
}

TEST_CASE("pipeline agrees with the serial brute-force implementation") {
  // Radii chosen so every neighborhood holds >= 3 points: smaller supports
  // can produce repeated eigenvalues whose eigenvectors are not unique.
  // The clouds differ everywhere (independent draws) so the unbounded RD4
  // ratio never sits on a vanishing denominator, and tolerances are scaled
  // by magnitude since RD4 values are legitimately huge.
  const PointCloud ref = testing::random_cloud(90, 101);
  const PointCloud dist = testing::random_cloud(90, 202);

  for (auto method : {CompareMethod::RD1, CompareMethod::AD,
                      CompareMethod::RD2, CompareMethod::RD4}) {
    PipelineConfig cfg;
    cfg.radius_factor = 0.45;
    cfg.k = 7;
    cfg.method = method;
    const PredictorResult fast = compute_predictors(ref, dist, cfg);
    const PredictorResult slow =
        reference::compute_predictors_bruteforce(ref, dist, cfg);
    CHECK(fast.radius == doctest::Approx(slow.radius).epsilon(1e-14));
    for (int j = 0; j < kFeatureCount; ++j) {
      const double tol =
          1e-9 * std::max(1.0, std::abs(slow.symmetric[j]));
      CHECK(std::abs(fast.dist_to_ref[j] - slow.dist_to_ref[j]) <= tol);
      CHECK(std::abs(fast.ref_to_dist[j] - slow.ref_to_dist[j]) <= tol);
      CHECK(std::abs(fast.symmetric[j] - slow.symmetric[j]) <= tol);
    }
  }
}

TEST_CASE("support radius comes from the designated reference cloud") {
  const PointCloud small = testing::random_cloud(50, 110, true, 1.0);
  PointCloud large = testing::random_cloud(50, 111, true, 10.0);
  PipelineConfig cfg;
  cfg.radius_factor = 0.3;
  cfg.k = 7;
  const PredictorResult a = compute_predictors(small, large, cfg);
  const PredictorResult b = compute_predictors(large, small, cfg);
  CHECK(a.radius < b.radius);  // extents differ, so the radius must too

  // With an explicit shared radius, swapping the roles swaps the directional
  // vectors and leaves the symmetric predictors unchanged.
  cfg.fixed_radius = 1.5;
  const PredictorResult f = compute_predictors(small, large, cfg);
  const PredictorResult g = compute_predictors(large, small, cfg);
  for (int j = 0; j < kFeatureCount; ++j) {
    CHECK(f.dist_to_ref[j] == doctest::Approx(g.ref_to_dist[j]).epsilon(1e-12));
    CHECK(f.symmetric[j] == doctest::Approx(g.symmetric[j]).epsilon(1e-12));
  }
}

TEST_CASE("colorless inputs zero the texture slots") {
  const PointCloud a = testing::random_cloud(60, 120, false);
  const PointCloud b = testing::random_cloud(60, 121, false);
  PipelineConfig cfg;
  cfg.radius_factor = 0.4;
  cfg.k = 7;
  const PredictorResult r = compute_predictors(a, b, cfg);
  CHECK_FALSE(r.has_texture);
  for (int j = 0; j < kFeatureCount; ++j) {
    if (is_texture_feature(j)) {
      CHECK(r.symmetric[j] == 0.0);
    }
  }
}

TEST_CASE("degenerate support radius is rejected") {
  PointCloud point;
  point.positions = {{1, 1, 1}};
  point.colors = {{0, 0, 0}};
  const PointCloud other = testing::random_cloud(10, 130);
  PipelineConfig cfg;  // radius = factor * 0 extent
  CHECK_THROWS_WITH_AS(compute_predictors(point, other, cfg),
                       doctest::Contains("degenerate support radius"),
                       CloudError);
}
