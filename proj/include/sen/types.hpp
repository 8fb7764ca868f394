#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>

namespace sen {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>;

// Per-node boolean flags (detections, ground truth).
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Default convergence tolerance for iterative eigensolvers.
template <typename Scalar>
constexpr Scalar default_tolerance() {
  if constexpr (sizeof(Scalar) <= 4) {
    return Scalar(1e-5);
  } else {
    return Scalar(1e-10);
  }
}

}  // namespace sen
