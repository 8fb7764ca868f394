#pragma once

#include "sen/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace sen {

/// Symmetric, nonnegative affinity matrix W with its cached degree vector
/// d(x) = sum_y W(x, y). Every degree is strictly positive.
///
/// Instances are immutable once built; construct through `from_weights`,
/// which validates the invariants.
template <typename Scalar>
class AffinityGraph {
 public:
  AffinityGraph() = default;

  /// Throws DimensionMismatch for a non-square matrix, OutOfRange for a
  /// negative or asymmetric entry and NonPositiveDegree for an empty row.
  static AffinityGraph from_weights(SparseMatrix<Scalar> weights);

  Index size() const { return weights_.rows(); }
  const SparseMatrix<Scalar>& weights() const { return weights_; }
  const Vector<Scalar>& degrees() const { return degrees_; }

 private:
  SparseMatrix<Scalar> weights_;
  Vector<Scalar> degrees_;
};

/// Node labels: 0 is background, j = 1..K is sub-cluster j.
class Partition {
 public:
  static constexpr int kBackground = 0;

  Partition() = default;

  /// Throws OutOfRange unless labels lie in 0..K with every cluster index
  /// present and both blocks nonempty.
  static Partition from_labels(std::vector<int> labels);

  Index size() const { return Index(labels_.size()); }
  int cluster_count() const { return k_; }
  int label(Index node) const { return labels_[std::size_t(node)]; }
  bool in_cluster(Index node) const { return labels_[std::size_t(node)] != kBackground; }
  const std::vector<int>& labels() const { return labels_; }

  Index cluster_size() const;
  // |C| / n.
  double delta() const { return double(cluster_size()) / double(size()); }
  // |C_j| for j = 1..K (entry j - 1).
  std::vector<Index> sub_cluster_sizes() const;
  std::vector<Index> background_nodes() const;
  std::vector<Index> cluster_nodes() const;
  Mask cluster_mask() const;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

/// W = W0 + E where W0 keeps the within-block edges (background-background
/// and cluster-cluster) and E the background-cluster edges.
template <typename Scalar>
struct DeformationPair {
  AffinityGraph<Scalar> w0;
  SparseMatrix<Scalar> e;
};

struct AffinityOptions {
  Index k_nn = 32;    // neighbours per node in the sparse construction
  Index k_st = 8;     // neighbour rank defining the self-tuning scale
  bool dense = false; // keep every pair instead of the kNN union
  Index dense_cap = 6000;  // largest n accepted by the dense path
};

/// Self-tuning Gaussian affinity exp(-|x - y|^2 / (sigma_x sigma_y)) where
/// sigma_x is the distance from x to its k_st-th nearest neighbour (x
/// itself excluded, ties broken by lower index). The sparse path keeps an
/// edge when either endpoint lists the other among its k_nn nearest
/// neighbours; the dense path keeps all pairs whose kernel value does not
/// underflow to zero. The diagonal is 1.
///
/// `points` holds one point per row. Throws OutOfRange unless
/// 1 <= k_st <= k_nn < n, TooLarge for a dense graph above dense_cap and
/// ZeroScale when some sigma_x is 0.
template <typename Scalar>
AffinityGraph<Scalar> build_affinity(const Eigen::Ref<const Matrix<Scalar>>& points,
                                     const AffinityOptions& options);

/// Throws SizeMismatch when the partition and graph disagree on n and
/// NonPositiveDegree when removing the cross edges isolates a node.
template <typename Scalar>
DeformationPair<Scalar> split_blocks(const AffinityGraph<Scalar>& graph, const Partition& part);

/// The graph W(t) = W0 + t E; throws OutOfRange unless 0 <= t <= 1.
template <typename Scalar>
AffinityGraph<Scalar> deform(const DeformationPair<Scalar>& pair, Scalar t);

/// Total cross-block weight sum_{x in B, y in C} W(x, y).
template <typename Scalar>
Scalar connection_strength(const AffinityGraph<Scalar>& graph, const Partition& part);

template <typename Scalar>
std::pair<Scalar, Scalar> degree_bounds(const AffinityGraph<Scalar>& graph);

/// Sum of degrees over `nodes`; throws IndexOutOfRange for an invalid node.
template <typename Scalar>
Scalar volume(const AffinityGraph<Scalar>& graph, std::span<const Index> nodes);

/// Connected components, each listed in increasing node order; components
/// are ordered by their smallest node.
template <typename Scalar>
std::vector<std::vector<Index>> connected_components(const AffinityGraph<Scalar>& graph);

/// Principal submatrix of the weights on `nodes` (in the given order).
template <typename Scalar>
SparseMatrix<Scalar> restrict_weights(const SparseMatrix<Scalar>& weights,
                                      std::span<const Index> nodes);

}  // namespace sen
