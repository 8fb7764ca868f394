#pragma once

// Shared builders for the unit and acceptance tests.

#include "sen/graph.hpp"
#include "sen/random.hpp"
#include "sen/spectral.hpp"
#include "sen/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <vector>

namespace sen::fixtures {

inline SparseMatrix<double> to_sparse(const Matrix<double>& dense) {
  return dense.sparseView(0.0, 0.0);
}

inline AffinityGraph<double> graph_from_dense(const Matrix<double>& dense) {
  return AffinityGraph<double>::from_weights(to_sparse(dense));
}

// Symmetric random weights; each off-diagonal pair present with probability
// `density`, self-loops always present so degrees stay positive.
inline Matrix<double> random_weights(Index n, double density, Rng& rng) {
  Matrix<double> w = Matrix<double>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    w(i, i) = 0.5 + rng.uniform();
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) {
        w(i, j) = w(j, i) = 0.05 + rng.uniform();
      }
    }
  }
  return w;
}

inline AffinityGraph<double> random_graph(Index n, double density, Rng& rng) {
  return graph_from_dense(random_weights(n, density, rng));
}

struct TwoBlock {
  Matrix<double> w0;   // within-block weights
  Matrix<double> e;    // cross-block weights
  std::vector<int> labels;

  Partition partition() const { return Partition::from_labels(labels); }
  DeformationPair<double> pair() const {
    return {graph_from_dense(w0), to_sparse(e)};
  }
  AffinityGraph<double> full() const { return graph_from_dense(w0 + e); }
};

// Background nodes first, then K clusters of `cluster_size` nodes. Within
// each block pairs are present with probability `density`; cross pairs
// with probability `cross_density` and weights uniform in (0, cross_scale).
inline TwoBlock random_two_block(Index n_background, int k_clusters, Index cluster_size,
                                 double density, double cross_density, double cross_scale,
                                 Rng& rng) {
  const Index n = n_background + Index(k_clusters) * cluster_size;
  TwoBlock tb;
  tb.w0 = Matrix<double>::Zero(n, n);
  tb.e = Matrix<double>::Zero(n, n);
  tb.labels.assign(std::size_t(n), 0);
  for (Index c = 0; c < Index(k_clusters); ++c) {
    for (Index j = 0; j < cluster_size; ++j) {
      tb.labels[std::size_t(n_background + c * cluster_size + j)] = int(c) + 1;
    }
  }
  for (Index i = 0; i < n; ++i) {
    tb.w0(i, i) = 0.5 + rng.uniform();
    for (Index j = i + 1; j < n; ++j) {
      const int li = tb.labels[std::size_t(i)];
      const int lj = tb.labels[std::size_t(j)];
      const bool same_block = (li == 0) == (lj == 0);
      if (same_block) {
        // clusters stay internally connected, background randomly
        const bool keep = (li != 0 && li == lj) || rng.uniform() < density;
        if (keep && (li == lj || li == 0)) tb.w0(i, j) = tb.w0(j, i) = 0.05 + rng.uniform();
      } else if (rng.uniform() < cross_density) {
        tb.e(i, j) = tb.e(j, i) = cross_scale * rng.uniform();
      }
    }
  }
  return tb;
}

// Full dense spectrum of P = D^-1 W straight from the generalized problem
// W v = lambda D v, independent of the library code path.
struct DenseOracle {
  Vector<double> values;   // descending
  Matrix<double> vectors;  // D-orthonormal
};

inline DenseOracle dense_oracle(const Matrix<double>& w) {
  const Vector<double> d = w.rowwise().sum();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix<double>> solver(w, d.asDiagonal().toDenseMatrix());
  DenseOracle o;
  o.values = solver.eigenvalues().reverse();
  o.vectors = solver.eigenvectors().rowwise().reverse();
  return o;
}

inline Matrix<double> dense(const AffinityGraph<double>& g) { return Matrix<double>(g.weights()); }

// max |(Psi^T D Psi) - I|
inline double d_residual(const EigenSystem<double>& es) {
  return double(d_orthonormality_residual(es));
}

}  // namespace sen::fixtures
