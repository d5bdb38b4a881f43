#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pointpca/quality.hpp"

namespace pointpca {

/// One manifest row: a stimulus with its subjective score. Predictors are
/// filled by the pipeline before calibration.
struct BenchmarkRecord {
  std::string content_id;
  std::string reference_path;
  std::string distorted_path;
  double mos = 0.0;
  FeatureVector predictors{};
};

/// Pearson linear correlation coefficient.
double plcc(std::span<const double> x, std::span<const double> y);

/// Spearman rank-order correlation; ties receive average ranks.
double srocc(std::span<const double> x, std::span<const double> y);

double rmse(std::span<const double> predicted, std::span<const double> target);

/// Monotone four-parameter logistic b1 + b2 / (1 + exp(-b3*(x - b4))).
struct LogisticModel {
  double b1 = 0.0, b2 = 1.0, b3 = 1.0, b4 = 0.0;
  bool converged = true;

  double operator()(double x) const;
};

/// Nonlinear least squares via Levenberg-Marquardt with deterministic
/// initialization; a near-linear seed is tried as well so the fit never
/// does worse than the best straight line.
LogisticModel fit_logistic(std::span<const double> pqs,
                           std::span<const double> mos);

struct LearnResult {
  WeightVector weights;
  LogisticModel model;
  std::vector<double> objective_trace;  // non-increasing
  bool converged = true;
};

/// Solves the simplex-constrained regression: minimize
/// ||MOS - f(sum_m w_m s_m)||^2 over w on the probability simplex, by
/// alternating logistic refits with projected-gradient descent on w.
/// Deterministic start at equal weights over the selection.
LearnResult learn_weights(std::span<const BenchmarkRecord> records,
                          const std::array<bool, kFeatureCount>& selection);

struct LeavePOutResult {
  WeightVector weights;                   // average across halves, renormalized
  std::size_t split_count = 0;            // distinct unordered equal splits
  bool sampled = false;                   // true when splits were subsampled
  std::uint64_t seed = 0;                 // sampling seed, when sampled
  std::vector<double> split_objectives;   // final objective per training half
};

/// Content-disjoint leave-p-out: enumerates equal splits of the content ids
/// (sampling with a fixed seed above `max_splits`), learns weights on each
/// half, and averages.
LeavePOutResult leave_p_out(std::span<const BenchmarkRecord> records,
                            const std::array<bool, kFeatureCount>& selection,
                            std::size_t max_splits = 10000,
                            std::uint64_t seed = 0);

}  // namespace pointpca
