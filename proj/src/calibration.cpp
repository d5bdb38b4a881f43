#include "pointpca/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pointpca {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y,
                const char* who) {
  if (x.size() != y.size()) {
    throw std::invalid_argument(std::string(who) + ": length mismatch");
  }
  if (x.size() < 2) {
    throw std::invalid_argument(std::string(who) + ": need at least 2 samples");
  }
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / v.size();
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double plcc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "plcc");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("plcc: zero variance input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double srocc(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "srocc");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return plcc(rx, ry);
}

double rmse(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  if (predicted.empty()) throw std::invalid_argument("rmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    s += d * d;
  }
  return std::sqrt(s / predicted.size());
}

double LogisticModel::operator()(double x) const {
  return b1 + b2 / (1.0 + std::exp(-b3 * (x - b4)));
}

namespace {

double sse(const LogisticModel& m, std::span<const double> x,
           std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - m(x[i]);
    s += r * r;
  }
  return s;
}

// Solves the 4x4 system in place; returns false when singular.
bool solve4(double a[4][5]) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
    }
  }
  for (int r = 0; r < 4; ++r) a[r][4] /= a[r][r];
  return true;
}

// Levenberg-Marquardt from a given start; keeps the best model seen.
LogisticModel lm_fit(LogisticModel m, std::span<const double> x,
                     std::span<const double> y) {
  double lambda = 1e-3;
  double best = sse(m, x, y);
  m.converged = false;

  for (int iter = 0; iter < 500; ++iter) {
    // Accumulate J^T J and J^T r.
    double jtj[4][4] = {};
    double jtr[4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::exp(-m.b3 * (x[i] - m.b4));
      const double l = 1.0 / (1.0 + e);
      const double dl = l * (1.0 - l);
      const double jac[4] = {1.0, l, m.b2 * dl * (x[i] - m.b4),
                             -m.b2 * dl * m.b3};
      const double r = y[i] - m(x[i]);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += jac[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += jac[a] * jac[b];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 32 && !stepped; ++attempt) {
      double sys[4][5];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) sys[a][b] = jtj[a][b];
        sys[a][a] += lambda * std::max(jtj[a][a], 1e-12);
        sys[a][4] = jtr[a];
      }
      if (!solve4(sys)) {
        lambda *= 10.0;
        continue;
      }
      LogisticModel trial = m;
      trial.b1 += sys[0][4];
      trial.b2 += sys[1][4];
      trial.b3 += sys[2][4];
      trial.b4 += sys[3][4];
      const double trial_sse = sse(trial, x, y);
      if (std::isfinite(trial_sse) && trial_sse <= best) {
        const double step =
            std::sqrt(sys[0][4] * sys[0][4] + sys[1][4] * sys[1][4] +
                      sys[2][4] * sys[2][4] + sys[3][4] * sys[3][4]);
        m = trial;
        best = trial_sse;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (step < 1e-9) {
          m.converged = true;
          return m;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!stepped) {
      // No descent direction found at any damping: local minimum.
      m.converged = true;
      return m;
    }
  }
  return m;
}

LogisticModel standard_seed(std::span<const double> x,
                            std::span<const double> y) {
  LogisticModel m;
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  m.b1 = *ymin_it;
  m.b2 = *ymax_it - *ymin_it;

  std::vector<double> xs(x.begin(), x.end());
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  m.b4 = xs[xs.size() / 2];

  // Sign-corrected slope estimate; logistic max slope is b2*b3/4.
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  m.b3 = 4.0 * slope / std::max(m.b2, 1e-12);
  if (m.b3 == 0.0) m.b3 = slope >= 0.0 ? 1.0 : -1.0;
  return m;
}

// A shallow-slope seed that reproduces the OLS line to rounding accuracy;
// with it the logistic fit nests near-linear shapes.
LogisticModel linear_seed(std::span<const double> x,
                          std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double range = std::max(*xmax_it - *xmin_it, 1e-12);

  LogisticModel m;
  m.b3 = (slope >= 0.0 ? 1.0 : -1.0) * 1e-6 / range;
  m.b2 = 4.0 * slope / m.b3;
  m.b4 = mx;
  m.b1 = my - m.b2 / 2.0;
  return m;
}

}  // namespace

LogisticModel fit_logistic(std::span<const double> pqs,
                           std::span<const double> mos) {
  if (pqs.size() != mos.size()) {
    throw std::invalid_argument("fit_logistic: length mismatch");
  }
  if (pqs.size() < 5) {
    throw std::invalid_argument("fit_logistic: need at least 5 samples");
  }
  if (variance(mos) <= 0.0) {
    throw std::invalid_argument("fit_logistic: MOS variance is zero");
  }
  if (variance(pqs) <= 0.0) {
    throw std::invalid_argument("fit_logistic: constant PQS");
  }

  const LogisticModel a = lm_fit(standard_seed(pqs, mos), pqs, mos);
  const LogisticModel b = lm_fit(linear_seed(pqs, mos), pqs, mos);
  return sse(a, pqs, mos) <= sse(b, pqs, mos) ? a : b;
}

namespace {

// Euclidean projection onto the probability simplex (Duchi et al. 2008).
void project_simplex(std::vector<double>& w) {
  std::vector<double> u(w);
  std::sort(u.begin(), u.end(), std::greater<>());
  double theta = 0.0, running = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    running += u[i];
    const double t = (running - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& v : w) v = std::max(v - theta, 0.0);
}

struct LearnProblem {
  std::vector<std::vector<double>> s;  // n x m selected predictor matrix
  std::vector<double> mos;

  std::vector<double> combine(const std::vector<double>& w) const {
    std::vector<double> u(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t m = 0; m < w.size(); ++m) u[i] += w[m] * s[i][m];
    }
    return u;
  }
};

double learn_objective(const LearnProblem& p, const std::vector<double>& w,
                       const LogisticModel& f) {
  const auto u = p.combine(w);
  double obj = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = p.mos[i] - f(u[i]);
    obj += r * r;
  }
  return obj;
}

}  // namespace

LearnResult learn_weights(std::span<const BenchmarkRecord> records,
                          const std::array<bool, kFeatureCount>& selection) {
  std::vector<int> idx;
  for (int j = 0; j < kFeatureCount; ++j) {
    if (selection[j]) idx.push_back(j);
  }
  if (idx.empty()) throw std::invalid_argument("learn_weights: empty selection");
  if (records.size() < idx.size() + 2) {
    throw std::invalid_argument(
        "learn_weights: insufficient records for the selection size");
  }

  LearnProblem p;
  p.s.resize(records.size());
  p.mos.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    p.mos[i] = records[i].mos;
    p.s[i].resize(idx.size());
    for (std::size_t m = 0; m < idx.size(); ++m) {
      p.s[i][m] = records[i].predictors[idx[m]];
    }
  }

  const std::size_t m_count = idx.size();
  std::vector<double> w(m_count, 1.0 / static_cast<double>(m_count));

  LearnResult result;
  LogisticModel f;
  auto refit = [&]() {
    const auto u = p.combine(w);
    if (variance(u) <= 0.0 || variance(p.mos) <= 0.0) {
      // Degenerate combination (e.g. identical predictors or constant MOS):
      // keep the identity-like current model.
      return;
    }
    LogisticModel trial = fit_logistic(u, p.mos);
    if (learn_objective(p, w, trial) <= learn_objective(p, w, f)) f = trial;
  };

  // Identity-like starting model spanning the MOS range.
  f = linear_seed(p.combine(w), p.mos);

  double obj = learn_objective(p, w, f);
  result.objective_trace.push_back(obj);
  double step = 1.0;

  for (int outer = 0; outer < 200; ++outer) {
    const double outer_start = obj;
    refit();
    double after_fit = learn_objective(p, w, f);
    if (after_fit < obj) {
      obj = after_fit;
      result.objective_trace.push_back(obj);
    }

    // Projected-gradient descent on w with backtracking.
    for (int inner = 0; inner < 100; ++inner) {
      const auto u = p.combine(w);
      std::vector<double> grad(m_count, 0.0);
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = std::exp(-f.b3 * (u[i] - f.b4));
        const double l = 1.0 / (1.0 + e);
        const double fprime = f.b2 * f.b3 * l * (1.0 - l);
        const double r = p.mos[i] - f(u[i]);
        for (std::size_t m = 0; m < m_count; ++m) {
          grad[m] += -2.0 * r * fprime * p.s[i][m];
        }
      }

      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> wt(m_count);
        for (std::size_t m = 0; m < m_count; ++m) {
          wt[m] = w[m] - step * grad[m];
        }
        project_simplex(wt);
        const double trial_obj = learn_objective(p, wt, f);
        if (trial_obj < obj) {
          w = wt;
          obj = trial_obj;
          result.objective_trace.push_back(obj);
          accepted = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;
      }
      if (!accepted) break;
    }

    if (outer_start - obj < 1e-10) break;
  }

  refit();
  result.model = f;
  result.weights = WeightVector{};
  for (std::size_t m = 0; m < m_count; ++m) {
    result.weights.weights[idx[m]] = w[m];
    result.weights.selected[idx[m]] = true;
  }
  return result;
}

LeavePOutResult leave_p_out(std::span<const BenchmarkRecord> records,
                            const std::array<bool, kFeatureCount>& selection,
                            std::size_t max_splits, std::uint64_t seed) {
  std::vector<std::string> contents;
  for (const auto& r : records) {
    if (std::find(contents.begin(), contents.end(), r.content_id) ==
        contents.end()) {
      contents.push_back(r.content_id);
    }
  }
  const std::size_t n = contents.size();
  if (n < 2) {
    throw std::invalid_argument("leave_p_out: need at least 2 contents");
  }
  const std::size_t half = n / 2;

  // Unordered equal splits: for even n pin the first content into one group
  // so each split is enumerated once; for odd n the two group sizes differ
  // and every floor(n/2)-subset is already a distinct split.
  std::vector<std::vector<std::size_t>> halves;  // one group per split
  const bool pin_first = (n % 2 == 0);
  const std::size_t pick = pin_first ? half - 1 : half;
  const std::size_t pool_size = pin_first ? n - 1 : n;

  auto n_choose_k = [](std::size_t nn, std::size_t kk) -> double {
    double v = 1.0;
    for (std::size_t i = 0; i < kk; ++i) {
      v *= static_cast<double>(nn - i) / static_cast<double>(i + 1);
    }
    return v;
  };
  const double total_splits = n_choose_k(pool_size, pick);

  LeavePOutResult result;
  if (total_splits <= static_cast<double>(max_splits)) {
    // Lexicographic enumeration of pick-subsets of the pool.
    std::vector<std::size_t> comb(pick);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      std::vector<std::size_t> group;
      if (pin_first) group.push_back(0);
      for (auto c : comb) group.push_back(pin_first ? c + 1 : c);
      halves.push_back(group);
      std::size_t i = pick;
      while (i > 0 && comb[i - 1] + (pick - i) + 1 >= pool_size) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < pick; ++j) comb[j] = comb[j - 1] + 1;
    }
  } else {
    result.sampled = true;
    result.seed = seed;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t s = 0; s < max_splits; ++s) {
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<std::size_t> group(pool.begin(), pool.begin() + half);
      if (pin_first &&
          std::find(group.begin(), group.end(), 0u) == group.end()) {
        group.assign(pool.begin() + half, pool.end());
      }
      halves.push_back(group);
    }
  }
  result.split_count = halves.size();

  std::array<double, kFeatureCount> accum{};
  std::size_t trained = 0;
  for (const auto& group : halves) {
    std::vector<bool> in_group(n, false);
    for (auto g : group) in_group[g] = true;

    for (int side = 0; side < 2; ++side) {
      std::vector<BenchmarkRecord> train;
      for (const auto& r : records) {
        const std::size_t ci = std::distance(
            contents.begin(),
            std::find(contents.begin(), contents.end(), r.content_id));
        const bool inside = in_group[ci];
        if ((side == 0) == inside) train.push_back(r);
      }
      auto learned = learn_weights(train, selection);
      result.split_objectives.push_back(learned.objective_trace.back());
      for (int j = 0; j < kFeatureCount; ++j) {
        accum[j] += learned.weights.weights[j];
      }
      ++trained;
    }
  }

  WeightVector avg;
  double total = 0.0;
  for (int j = 0; j < kFeatureCount; ++j) {
    avg.selected[j] = selection[j];
    if (selection[j]) {
      avg.weights[j] = accum[j] / static_cast<double>(trained);
      total += avg.weights[j];
    }
  }
  // Convexity keeps the average on the simplex; renormalize residual drift.
  for (int j = 0; j < kFeatureCount; ++j) {
    if (avg.selected[j]) avg.weights[j] /= total;
  }
  result.weights = avg;
  return result;
}

}  // namespace pointpca
