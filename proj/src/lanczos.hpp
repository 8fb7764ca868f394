#pragma once

#include "sen/errors.hpp"
#include "sen/random.hpp"
#include "sen/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace sen::detail {

template <typename Scalar>
struct LanczosParams {
  Index block = 4;
  Index max_basis = 0;  // 0 picks a size from nev
  Index max_restarts = 2000;
  Scalar tolerance = default_tolerance<Scalar>();
  std::uint64_t seed = 7;
};

template <typename Scalar>
struct Eigenpairs {
  Vector<Scalar> values;  // descending
  Matrix<Scalar> vectors;
  Index matvecs = 0;
  Index restarts = 0;
};

// Largest `nev` eigenpairs of a symmetric operator, apply(X) returning A X.
//
// Block Lanczos with explicit Rayleigh-Ritz on a stored basis V and its
// image AV. Thick restart keeps the leading Ritz vectors and continues
// from their residuals.
template <typename Scalar, typename Apply>
Eigenpairs<Scalar> block_lanczos(Index n, Index nev, Apply&& apply,
                                 const LanczosParams<Scalar>& p) {
  using Mat = Matrix<Scalar>;
  using Vec = Vector<Scalar>;
  if (nev < 1 || nev > n) {
    throw Error(Errc::OutOfRange, "requested " + std::to_string(nev) + " eigenpairs of a " +
                                      std::to_string(n) + "-dimensional operator");
  }
  const Index b = std::clamp<Index>(p.block, 1, n);
  Index kmax = p.max_basis > 0 ? p.max_basis : std::max(2 * nev + 2 * b, nev + 12 * b);
  kmax = std::min(std::max(kmax, nev + b), n);
  const Index keep_target = std::max(nev, std::min(kmax - b, nev + (kmax - nev) / 2));

  Mat V(n, kmax);
  Mat AV(n, kmax);
  Mat H = Mat::Zero(kmax, kmax);
  Rng rng(p.seed);
  Eigenpairs<Scalar> out;

  const auto random_block = [&](Index cols) {
    Mat X(n, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < n; ++i) X(i, j) = Scalar(rng.normal());
    }
    return X;
  };

  // Orthonormalizes x against V(:, 0:k) (two Gram-Schmidt passes) and
  // stores it at column k; false when x is numerically dependent.
  const auto try_append = [&](Vec x, Index k) {
    const Scalar norm0 = x.norm();
    if (!(norm0 > Scalar(0))) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) x.noalias() -= V.leftCols(k) * (V.leftCols(k).transpose() * x);
    }
    const Scalar norm1 = x.norm();
    if (!(norm1 > Scalar(1e3) * std::numeric_limits<Scalar>::epsilon() * norm0)) return false;
    V.col(k) = x / norm1;
    return true;
  };

  Index k = 0;
  Index last = 0;
  Mat pending = random_block(b);
  for (Index restart = 0;; ++restart) {
    while (k < kmax) {
      Mat X;
      if (pending.cols() > 0) {
        X = std::move(pending);
        pending.resize(n, 0);
      } else {
        X = AV.middleCols(k - last, last);
      }
      const Index want = std::min(b, kmax - k);
      Index added = 0;
      for (Index c = 0; c < X.cols() && added < want; ++c) {
        if (try_append(X.col(c), k + added)) ++added;
      }
      for (int attempt = 0; added < want && attempt < 8 * want; ++attempt) {
        if (try_append(random_block(1).col(0), k + added)) ++added;
      }
      if (added == 0) break;
      AV.middleCols(k, added) = apply(V.middleCols(k, added));
      out.matvecs += added;
      H.block(0, k, k + added, added).noalias() =
          V.leftCols(k + added).transpose() * AV.middleCols(k, added);
      H.block(k, 0, added, k) = H.block(0, k, k, added).transpose();
      const Mat diag = H.block(k, k, added, added);
      H.block(k, k, added, added) = (diag + diag.transpose()) / Scalar(2);
      last = added;
      k += added;
    }

    Eigen::SelfAdjointEigenSolver<Mat> rr(H.topLeftCorner(k, k));
    if (rr.info() != Eigen::Success) {
      throw Error(Errc::ConvergenceFailure, "Rayleigh-Ritz eigensolve failed");
    }
    const bool complete = (k == n);
    const Index keep = complete ? nev : std::min(k, keep_target);
    // Descending order.
    Mat Q = rr.eigenvectors().rightCols(keep).rowwise().reverse();
    Vec theta = rr.eigenvalues().tail(keep).reverse();
    Mat Y = V.leftCols(k) * Q;
    Mat AY = AV.leftCols(k) * Q;
    Mat R = AY - Y * theta.asDiagonal();
    const Vec rnorm = R.colwise().norm();

    Index worst = 0;
    for (Index i = 0; i < nev; ++i) {
      if (rnorm(i) > rnorm(worst)) worst = i;
    }
    if (complete || rnorm(worst) <= p.tolerance) {
      out.values = theta.head(nev);
      out.vectors = Y.leftCols(nev);
      out.restarts = restart;
      return out;
    }
    if (restart >= p.max_restarts) {
      throw Error(Errc::ConvergenceFailure,
                  "no convergence after " + std::to_string(restart) + " restarts (residual " +
                      std::to_string(double(rnorm(worst))) + ")");
    }

    // Continue from the residuals of the least converged wanted vectors.
    std::vector<Index> order(static_cast<std::size_t>(nev));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index c) { return rnorm(a) > rnorm(c); });
    const Index take = std::min<Index>(b, nev);
    pending.resize(n, take);
    for (Index j = 0; j < take; ++j) pending.col(j) = R.col(order[std::size_t(j)]);

    V.leftCols(keep) = Y;
    AV.leftCols(keep) = AY;
    H.setZero();
    H.topLeftCorner(keep, keep).diagonal() = theta;
    k = keep;
    last = 0;
  }
}

}  // namespace sen::detail
