#pragma once

#include <array>

#include "pointpca/geometry.hpp"

namespace pointpca {

/// Eigen-decomposition of a symmetric PSD 3x3 matrix. Eigenvalues sorted
/// descending, tiny negatives clamped to zero. Eigenvectors orthonormal,
/// sign fixed so each vector's largest-magnitude component is positive.
struct EigenSystem {
  std::array<double, 3> eigenvalues{};   // lambda1 >= lambda2 >= lambda3 >= 0
  std::array<Vec3, 3> eigenvectors{};    // paired by index
};

/// Cyclic Jacobi iteration; off-diagonal driven below 1e-13 * ||input||.
/// Throws std::invalid_argument for inputs that are non-symmetric beyond
/// tolerance or have eigenvalues more negative than rounding noise allows.
EigenSystem eigen_decompose(const Mat3& covariance);

}  // namespace pointpca
