#include "pointpca/reference_impl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

// Everything in this file is deliberately written as straight-line serial
// code, independent of the kd-tree, the Jacobi solver, and the parallel
// kernels it is used to verify.

namespace pointpca::reference {

namespace {

PointCloud fuse_bruteforce(const PointCloud& cloud) {
  PointCloud out;
  const bool color = cloud.has_colors();
  std::vector<std::size_t> group_of;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool found = false;
    for (std::size_t g = 0; g < out.positions.size(); ++g) {
      if (out.positions[g] == cloud.positions[i]) {
        group_of.push_back(g);
        found = true;
        break;
      }
    }
    if (!found) {
      group_of.push_back(out.positions.size());
      out.positions.push_back(cloud.positions[i]);
    }
  }
  if (color) {
    out.colors.assign(out.positions.size(), Vec3{});
    std::vector<int> counts(out.positions.size(), 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      out.colors[group_of[i]] += cloud.colors[i];
      ++counts[group_of[i]];
    }
    for (std::size_t g = 0; g < out.colors.size(); ++g) {
      out.colors[g] = out.colors[g] * (1.0 / counts[g]);
    }
  }
  return out;
}

std::vector<std::size_t> neighbors_in_radius(const PointCloud& cloud,
                                             const Vec3& q, double r) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = norm(cloud.positions[i] - q);
    if (d <= r) all.emplace_back(d, i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (auto& [d, i] : all) out.push_back(i);
  return out;
}

std::vector<std::size_t> k_nearest(const PointCloud& cloud, const Vec3& q,
                                   std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    all.emplace_back(norm(cloud.positions[i] - q), i);
  }
  std::sort(all.begin(), all.end());
  all.resize(std::min(k, all.size()));
  std::vector<std::size_t> out;
  for (auto& [d, i] : all) out.push_back(i);
  return out;
}

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric
// Cardano), eigenvectors from row cross products.
struct Eigs {
  double l[3];
  Vec3 v[3];
};

Eigs analytic_eigen(const double a[3][3]) {
  const double m = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  double k[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k[r][c] = a[r][c] - (r == c ? m : 0.0);
  double q2 = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) q2 += k[r][c] * k[r][c];
  const double p = std::sqrt(q2 / 6.0);

  Eigs out{};
  if (p < 1e-300) {
    out.l[0] = out.l[1] = out.l[2] = m;
    out.v[0] = {1, 0, 0};
    out.v[1] = {0, 1, 0};
    out.v[2] = {0, 0, 1};
    return out;
  }
  double b[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b[r][c] = k[r][c] / p;
  const double detb =
      b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
      b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
      b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double phi = std::acos(std::clamp(detb / 2.0, -1.0, 1.0)) / 3.0;
  const double two_pi_3 = 2.0943951023931953;
  double l[3] = {m + 2.0 * p * std::cos(phi),
                 m + 2.0 * p * std::cos(phi + 2.0 * two_pi_3),
                 m + 2.0 * p * std::cos(phi + two_pi_3)};
  std::sort(l, l + 3, std::greater<>());

  // The acos route loses a few digits near clustered roots; polish each
  // eigenvalue with Newton steps on the characteristic polynomial.
  const double c2 = a[0][0] + a[1][1] + a[2][2];
  const double c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0] +
                    a[0][0] * a[2][2] - a[0][2] * a[2][0] +
                    a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double c0 =
      a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  for (double& root : l) {
    for (int it = 0; it < 3; ++it) {
      const double f = ((root - c2) * root + c1) * root - c0;
      const double df = (3.0 * root - 2.0 * c2) * root + c1;
      if (df == 0.0) break;
      const double step = f / df;
      if (!std::isfinite(step) || std::abs(step) > p) break;
      root -= step;
    }
  }
  std::sort(l, l + 3, std::greater<>());

  for (int e = 0; e < 3; ++e) {
    double s[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) s[r][c] = a[r][c] - (r == c ? l[e] : 0.0);
    const Vec3 r0{s[0][0], s[0][1], s[0][2]};
    const Vec3 r1{s[1][0], s[1][1], s[1][2]};
    const Vec3 r2{s[2][0], s[2][1], s[2][2]};
    Vec3 cand[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
    Vec3 best = cand[0];
    for (int i = 1; i < 3; ++i) {
      if (squared_norm(cand[i]) > squared_norm(best)) best = cand[i];
    }
    const double bn = norm(best);
    if (bn < 1e-200) {
      // Degenerate pencil: fall back to an axis orthogonal to the already
      // found vectors.
      Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
      best = axes[e];
      for (int prev = 0; prev < e; ++prev) {
        best = best - out.v[prev] * dot(best, out.v[prev]);
      }
      if (norm(best) < 1e-12) best = axes[(e + 1) % 3];
      best = best * (1.0 / norm(best));
    } else {
      best = best * (1.0 / bn);
    }
    out.l[e] = l[e];
    out.v[e] = best;
  }
  return out;
}

std::array<double, kDescriptorCount> descriptors_at(
    const PointCloud& cloud, std::size_t i, double radius,
    const PipelineConfig& cfg) {
  const Vec3& q = cloud.positions[i];
  auto nbh = neighbors_in_radius(cloud, q, radius);
  if (!cfg.include_query_point) {
    std::erase(nbh, i);
  }
  if (nbh.empty()) nbh.push_back(i);
  const double n = static_cast<double>(nbh.size());

  Vec3 mean{};
  for (auto idx : nbh) mean += cloud.positions[idx];
  mean = mean * (1.0 / n);

  double cov[3][3] = {};
  for (auto idx : nbh) {
    const Vec3 dev = cloud.positions[idx] - mean;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cov[r][c] += dev[r] * dev[c];
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cov[r][c] /= n;

  Eigs eig = analytic_eigen(cov);
  for (int e = 0; e < 3; ++e) eig.l[e] = std::max(eig.l[e], 0.0);
  const double l1 = eig.l[0], l2 = eig.l[1], l3 = eig.l[2];
  const double sum = l1 + l2 + l3;
  const Vec3& e3 = eig.v[2];

  std::array<double, kDescriptorCount> d{};
  d[0] = l1;
  d[1] = l2;
  d[2] = l3;
  d[3] = sum;
  d[4] = (l1 - l2) / (l1 + kEpsilon);
  d[5] = (l2 - l3) / (l1 + kEpsilon);
  d[6] = l3 / (l1 + kEpsilon);
  d[7] = (l1 - l3) / (l1 + kEpsilon);
  // Same numerical-zero floor as the primary implementation: cbrt would
  // otherwise blow rounding noise in flat neighborhoods up to ~1e-5.
  const auto solid = [&](double l) { return l > 1e-12 * l1 ? l : 0.0; };
  d[8] = std::cbrt(solid(l1) * solid(l2) * solid(l3));
  double entropy = 0.0;
  if (cfg.entropy_mode == Eigenentropy::Normalized) {
    if (sum > kEpsilon) {
      for (double l : eig.l) {
        entropy -= (l / sum) * std::log(std::max(l / sum, kEpsilon));
      }
    }
  } else {
    for (double l : eig.l) entropy -= l * std::log(std::max(l, kEpsilon));
  }
  d[9] = entropy;
  d[10] = l3 / (sum + kEpsilon);
  d[11] = std::abs(dot(q - mean, e3));
  d[12] = 1.0 - std::abs(e3.x);
  d[13] = 1.0 - std::abs(e3.y);
  d[14] = 1.0 - std::abs(e3.z);
  if (cloud.has_colors()) {
    d[kGeomDescriptorCount] =
        textural_descriptor(cloud.colors[i], cfg.color_space);
  }
  return d;
}

std::vector<FeatureVector> features_of(const PointCloud& cloud,
                                       const PipelineConfig& cfg,
                                       double radius) {
  std::vector<std::array<double, kDescriptorCount>> desc(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    desc[i] = descriptors_at(cloud, i, radius, cfg);
  }
  std::vector<FeatureVector> feat(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbh = k_nearest(cloud, cloud.positions[i], cfg.k);
    const double n = static_cast<double>(nbh.size());
    for (int j = 0; j < kDescriptorCount; ++j) {
      double mu = 0.0;
      for (auto idx : nbh) mu += desc[idx][j];
      mu /= n;
      double var = 0.0;
      for (auto idx : nbh) var += (desc[idx][j] - mu) * (desc[idx][j] - mu);
      feat[i][j] = mu;
      feat[i][kDescriptorCount + j] = std::sqrt(var / n);
    }
  }
  return feat;
}

double compare_value(double a, double b, CompareMethod m) {
  switch (m) {
    case CompareMethod::AD:
      return std::fabs(a - b);
    case CompareMethod::SD:
      return (a - b) * (a - b);
    case CompareMethod::RD1:
      return std::fabs(a - b) /
             (std::max(std::fabs(a), std::fabs(b)) + kEpsilon);
    case CompareMethod::RD2:
      return 2.0 * a * b / (a * a * b * b + kEpsilon);
    case CompareMethod::RD3:
      return std::fabs(a - b) / (std::fabs(a + b) + kEpsilon);
    case CompareMethod::RD4:
      return std::max(std::fabs(a), std::fabs(b)) /
             (std::fabs(a - b) + kEpsilon);
  }
  return 0.0;
}

FeatureVector direction(const PointCloud& eval_cloud,
                        const std::vector<FeatureVector>& eval_feat,
                        const PointCloud& ref_cloud,
                        const std::vector<FeatureVector>& ref_feat,
                        CompareMethod method) {
  FeatureVector s{};
  for (std::size_t i = 0; i < eval_cloud.size(); ++i) {
    // Nearest reference point; ties to the lower index.
    std::size_t best = 0;
    double best_d = squared_distance(eval_cloud.positions[i],
                                     ref_cloud.positions[0]);
    for (std::size_t a = 1; a < ref_cloud.size(); ++a) {
      const double d =
          squared_distance(eval_cloud.positions[i], ref_cloud.positions[a]);
      if (d < best_d) {
        best_d = d;
        best = a;
      }
    }
    for (int j = 0; j < kFeatureCount; ++j) {
      s[j] += compare_value(ref_feat[best][j], eval_feat[i][j], method);
    }
  }
  for (int j = 0; j < kFeatureCount; ++j) {
    s[j] /= static_cast<double>(eval_cloud.size());
  }
  return s;
}

}  // namespace

PredictorResult compute_predictors_bruteforce(const PointCloud& reference,
                                              const PointCloud& distorted,
                                              const PipelineConfig& config) {
  const PointCloud ref = fuse_bruteforce(reference);
  const PointCloud dist = fuse_bruteforce(distorted);

  double radius;
  if (config.fixed_radius) {
    radius = *config.fixed_radius;
  } else {
    Vec3 lo = ref.positions[0], hi = lo;
    for (const auto& p : ref.positions) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
    double side = 0.0;
    for (int a = 0; a < 3; ++a) side = std::max(side, hi[a] - lo[a]);
    radius = config.radius_factor * side;
  }

  const auto ref_feat = features_of(ref, config, radius);
  const auto dist_feat = features_of(dist, config, radius);

  PredictorResult out;
  out.radius = radius;
  out.has_texture = ref.has_colors() && dist.has_colors();
  out.dist_to_ref = direction(dist, dist_feat, ref, ref_feat, config.method);
  out.ref_to_dist = direction(ref, ref_feat, dist, dist_feat, config.method);
  for (int j = 0; j < kFeatureCount; ++j) {
    out.symmetric[j] = std::max(out.dist_to_ref[j], out.ref_to_dist[j]);
  }
  return out;
}

}  // namespace pointpca::reference
