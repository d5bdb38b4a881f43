#include "pointpca/eigen3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pointpca {

namespace {

double max_abs(const Mat3& m) {
  double v = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v = std::max(v, std::abs(m(r, c)));
  return v;
}

void fix_sign(Vec3& v) {
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(v[a]) > std::abs(v[best])) best = a;
  }
  if (v[best] < 0.0) {
    v.x = -v.x;
    v.y = -v.y;
    v.z = -v.z;
  }
}

}  // namespace

EigenSystem eigen_decompose(const Mat3& covariance) {
  const double scale = max_abs(covariance);
  const double sym_tol = 1e-12 * std::max(1.0, scale);
  for (int r = 0; r < 3; ++r) {
    for (int c = r + 1; c < 3; ++c) {
      if (std::abs(covariance(r, c) - covariance(c, r)) > sym_tol) {
        throw std::invalid_argument(
            "eigen_decompose: input not symmetric within tolerance");
      }
    }
  }

  // Work on the symmetrized copy; V accumulates the rotations.
  Mat3 a = covariance;
  for (int r = 0; r < 3; ++r) {
    for (int c = r + 1; c < 3; ++c) {
      const double s = 0.5 * (a(r, c) + a(c, r));
      a(r, c) = a(c, r) = s;
    }
  }
  Mat3 v;
  v(0, 0) = v(1, 1) = v(2, 2) = 1.0;

  const double off_tol = 1e-13 * std::max(scale, 1e-300);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a(0, 1)) + std::abs(a(0, 2)) + std::abs(a(1, 2));
    if (off <= off_tol) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= off_tol * 1e-3) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < 3; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < 3; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < 3; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::array<double, 3> lam{a(0, 0), a(1, 1), a(2, 2)};
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (lam[i] != lam[j]) return lam[i] > lam[j];
    return i < j;
  });

  EigenSystem out;
  const double neg_tol = 1e-10 * std::max(1.0, scale);
  for (int k = 0; k < 3; ++k) {
    double l = lam[order[k]];
    if (l < 0.0) {
      if (l < -neg_tol) {
        throw std::invalid_argument(
            "eigen_decompose: input not positive semi-definite");
      }
      l = 0.0;
    }
    out.eigenvalues[k] = l;
    out.eigenvectors[k] = {v(0, order[k]), v(1, order[k]), v(2, order[k])};
    fix_sign(out.eigenvectors[k]);
  }
  return out;
}

}  // namespace pointpca
