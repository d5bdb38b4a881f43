// Timing comparison between the serial brute-force pipeline and the
// kd-tree-backed OpenMP pipeline, on a synthetic noisy sphere pair.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "pointpca/comparison.hpp"
#include "pointpca/reference_impl.hpp"

using namespace pointpca;

namespace {

PointCloud noisy_sphere(std::size_t n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p{gauss(rng), gauss(rng), gauss(rng)};
    p = p * (1.0 / norm(p));
    p += Vec3{gauss(rng), gauss(rng), gauss(rng)} * noise;
    cloud.positions.push_back(p);
    cloud.colors.push_back(
        {128.0 + 100.0 * p.x, 128.0 + 100.0 * p.y, 128.0 + 100.0 * p.z});
  }
  return cloud;
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
  PipelineConfig cfg;
  cfg.radius_factor = 0.15;

  const PointCloud ref = noisy_sphere(n, 0.0, 1);
  const PointCloud dist = noisy_sphere(n, 0.01, 2);

  PredictorResult serial, parallel;
  const double t_serial = time_ms([&] {
    serial = reference::compute_predictors_bruteforce(ref, dist, cfg);
  });
  const double t_parallel =
      time_ms([&] { parallel = compute_predictors(ref, dist, cfg); });

  double max_diff = 0.0;
  for (int j = 0; j < kFeatureCount; ++j) {
    max_diff = std::max(max_diff,
                        std::abs(serial.symmetric[j] - parallel.symmetric[j]));
  }

  std::printf("points            %zu\n", n);
  std::printf("threads           %d\n", omp_get_max_threads());
  std::printf("serial bruteforce %.1f ms\n", t_serial);
  std::printf("parallel kd-tree  %.1f ms\n", t_parallel);
  std::printf("speedup           %.1fx\n", t_serial / t_parallel);
  std::printf("max predictor diff %.3e\n", max_diff);
  return 0;
}
