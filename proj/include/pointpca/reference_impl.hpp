#pragma once

#include "pointpca/comparison.hpp"

namespace pointpca::reference {

/// Serial, brute-force evaluation of the whole pipeline: linear-scan
/// neighborhoods, direct accumulation of the covariance and statistics
/// formulas, and an independently written eigen solver. Kept as the
/// correctness oracle for the kd-tree-backed, OpenMP-parallel pipeline and
/// as the baseline of the benchmark tool. O(n^2); use on small clouds.
PredictorResult compute_predictors_bruteforce(const PointCloud& reference,
                                              const PointCloud& distorted,
                                              const PipelineConfig& config);

}  // namespace pointpca::reference
