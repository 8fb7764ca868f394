#include "sen/graph.hpp"

#include "sen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace sen {

namespace {

template <typename Scalar>
using Triplet = Eigen::Triplet<Scalar, Index>;

template <typename Scalar>
SparseMatrix<Scalar> from_triplets(Index n, const std::vector<Triplet<Scalar>>& triplets) {
  SparseMatrix<Scalar> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// Squared distances from row i to every row, as a column vector.
template <typename Scalar>
Vector<Scalar> squared_distances(const Eigen::Ref<const Matrix<Scalar>>& points, Index i) {
  return (points.rowwise() - points.row(i)).rowwise().squaredNorm();
}

}  // namespace

template <typename Scalar>
AffinityGraph<Scalar> AffinityGraph<Scalar>::from_weights(SparseMatrix<Scalar> weights) {
  if (weights.rows() != weights.cols()) {
    throw Error(Errc::DimensionMismatch, "affinity matrix must be square");
  }
  weights.makeCompressed();
  const Index n = weights.rows();
  Vector<Scalar> degrees = Vector<Scalar>::Zero(n);
  for (Index col = 0; col < n; ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(weights, col); it; ++it) {
      const Scalar w = it.value();
      if (!(w >= Scalar(0))) {
        throw Error(Errc::OutOfRange, "negative or NaN weight at (" + std::to_string(it.row()) +
                                          ", " + std::to_string(col) + ")");
      }
      if (it.row() < col && weights.coeff(col, it.row()) != w) {
        throw Error(Errc::OutOfRange, "asymmetric weight at (" + std::to_string(it.row()) + ", " +
                                          std::to_string(col) + ")");
      }
      if (it.row() > col && w != Scalar(0) && weights.coeff(col, it.row()) == Scalar(0)) {
        throw Error(Errc::OutOfRange, "asymmetric pattern at (" + std::to_string(it.row()) +
                                          ", " + std::to_string(col) + ")");
      }
      degrees(it.row()) += w;
    }
  }
  for (Index x = 0; x < n; ++x) {
    if (!(degrees(x) > Scalar(0))) {
      throw Error(Errc::NonPositiveDegree, "node " + std::to_string(x) + " has zero degree");
    }
  }
  AffinityGraph graph;
  graph.weights_ = std::move(weights);
  graph.degrees_ = std::move(degrees);
  return graph;
}

Partition Partition::from_labels(std::vector<int> labels) {
  int k = 0;
  for (const int label : labels) {
    if (label < 0) {
      throw Error(Errc::OutOfRange, "negative partition label");
    }
    k = std::max(k, label);
  }
  std::vector<Index> counts(std::size_t(k) + 1, 0);
  for (const int label : labels) {
    ++counts[std::size_t(label)];
  }
  if (counts[0] == 0) {
    throw Error(Errc::OutOfRange, "partition has no background node");
  }
  if (k == 0) {
    throw Error(Errc::OutOfRange, "partition has no cluster node");
  }
  for (int j = 1; j <= k; ++j) {
    if (counts[std::size_t(j)] == 0) {
      throw Error(Errc::OutOfRange, "cluster " + std::to_string(j) + " is empty");
    }
  }
  Partition part;
  part.labels_ = std::move(labels);
  part.k_ = k;
  return part;
}

Index Partition::cluster_size() const {
  return Index(std::count_if(labels_.begin(), labels_.end(),
                             [](int label) { return label != kBackground; }));
}

std::vector<Index> Partition::sub_cluster_sizes() const {
  std::vector<Index> sizes(std::size_t(k_), 0);
  for (const int label : labels_) {
    if (label != kBackground) {
      ++sizes[std::size_t(label - 1)];
    }
  }
  return sizes;
}

std::vector<Index> Partition::background_nodes() const {
  std::vector<Index> nodes;
  for (Index x = 0; x < size(); ++x) {
    if (!in_cluster(x)) nodes.push_back(x);
  }
  return nodes;
}

std::vector<Index> Partition::cluster_nodes() const {
  std::vector<Index> nodes;
  for (Index x = 0; x < size(); ++x) {
    if (in_cluster(x)) nodes.push_back(x);
  }
  return nodes;
}

Mask Partition::cluster_mask() const {
  Mask mask(size());
  for (Index x = 0; x < size(); ++x) {
    mask(x) = in_cluster(x);
  }
  return mask;
}

template <typename Scalar>
AffinityGraph<Scalar> build_affinity(const Eigen::Ref<const Matrix<Scalar>>& points,
                                     const AffinityOptions& options) {
  const Index n = points.rows();
  const Index k_nn = options.dense ? std::max(options.k_nn, options.k_st) : options.k_nn;
  if (options.k_st < 1 || options.k_st > k_nn || k_nn >= n) {
    throw Error(Errc::OutOfRange, "need 1 <= k_st <= k_nn < n (k_st=" +
                                      std::to_string(options.k_st) + ", k_nn=" +
                                      std::to_string(options.k_nn) + ", n=" + std::to_string(n) +
                                      ")");
  }
  if (options.dense && n > options.dense_cap) {
    throw Error(Errc::TooLarge, "dense graph on " + std::to_string(n) + " points exceeds the cap of " +
                                    std::to_string(options.dense_cap));
  }
  if (!points.allFinite()) {
    throw Error(Errc::OutOfRange, "points contain non-finite coordinates");
  }

  // Neighbour lists sorted by (distance, index), self excluded.
  const Index list_len = options.dense ? options.k_st : k_nn;
  std::vector<std::vector<Index>> neighbours(static_cast<std::size_t>(n));
  Vector<Scalar> sigma(n);
  std::vector<std::pair<Scalar, Index>> candidates;
  candidates.reserve(std::size_t(n));
  for (Index i = 0; i < n; ++i) {
    const Vector<Scalar> d2 = squared_distances<Scalar>(points, i);
    candidates.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(d2(j), j);
    }
    const auto mid = candidates.begin() + list_len;
    std::partial_sort(candidates.begin(), mid, candidates.end());
    sigma(i) = std::sqrt(candidates[std::size_t(options.k_st - 1)].first);
    if (!(sigma(i) > Scalar(0))) {
      throw Error(Errc::ZeroScale, "node " + std::to_string(i) + " has " +
                                       std::to_string(options.k_st) +
                                       " duplicates; self-tuning scale is zero");
    }
    if (!options.dense) {
      auto& list = neighbours[std::size_t(i)];
      list.reserve(std::size_t(list_len));
      for (auto it = candidates.begin(); it != mid; ++it) list.push_back(it->second);
    }
  }

  std::vector<Triplet<Scalar>> triplets;
  for (Index i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, Scalar(1));
  }
  const auto add_pair = [&](Index i, Index j, Scalar d2) {
    const Scalar w = std::exp(-d2 / (sigma(i) * sigma(j)));
    if (w > Scalar(0)) {
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
    }
  };

  if (options.dense) {
    for (Index i = 0; i + 1 < n; ++i) {
      const Index rest = n - i - 1;
      const Vector<Scalar> d2 =
          (points.bottomRows(rest).rowwise() - points.row(i)).rowwise().squaredNorm();
      for (Index r = 0; r < rest; ++r) add_pair(i, i + 1 + r, d2(r));
    }
  } else {
    std::vector<std::pair<Index, Index>> edges;
    edges.reserve(std::size_t(n * k_nn));
    for (Index i = 0; i < n; ++i) {
      for (const Index j : neighbours[std::size_t(i)]) {
        edges.emplace_back(std::min(i, j), std::max(i, j));
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [i, j] : edges) {
      add_pair(i, j, (points.row(i) - points.row(j)).squaredNorm());
    }
  }
  return AffinityGraph<Scalar>::from_weights(from_triplets<Scalar>(n, triplets));
}

template <typename Scalar>
DeformationPair<Scalar> split_blocks(const AffinityGraph<Scalar>& graph, const Partition& part) {
  const Index n = graph.size();
  if (part.size() != n) {
    throw Error(Errc::SizeMismatch, "partition size " + std::to_string(part.size()) +
                                        " differs from graph size " + std::to_string(n));
  }
  std::vector<Triplet<Scalar>> within;
  std::vector<Triplet<Scalar>> cross;
  within.reserve(std::size_t(graph.weights().nonZeros()));
  for (Index col = 0; col < n; ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(graph.weights(), col); it; ++it) {
      if (part.in_cluster(it.row()) == part.in_cluster(col)) {
        within.emplace_back(it.row(), col, it.value());
      } else {
        cross.emplace_back(it.row(), col, it.value());
      }
    }
  }
  DeformationPair<Scalar> pair;
  pair.w0 = AffinityGraph<Scalar>::from_weights(from_triplets<Scalar>(n, within));
  pair.e = from_triplets<Scalar>(n, cross);
  return pair;
}

template <typename Scalar>
AffinityGraph<Scalar> deform(const DeformationPair<Scalar>& pair, Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1))) {
    throw Error(Errc::OutOfRange, "deformation time must lie in [0, 1]");
  }
  if (t == Scalar(0)) {
    return pair.w0;
  }
  SparseMatrix<Scalar> w = pair.w0.weights() + t * pair.e;
  return AffinityGraph<Scalar>::from_weights(std::move(w));
}

template <typename Scalar>
Scalar connection_strength(const AffinityGraph<Scalar>& graph, const Partition& part) {
  if (part.size() != graph.size()) {
    throw Error(Errc::SizeMismatch, "partition size differs from graph size");
  }
  Scalar total(0);
  for (Index col = 0; col < graph.size(); ++col) {
    if (!part.in_cluster(col)) continue;
    for (typename SparseMatrix<Scalar>::InnerIterator it(graph.weights(), col); it; ++it) {
      if (!part.in_cluster(it.row())) total += it.value();
    }
  }
  return total;
}

template <typename Scalar>
std::pair<Scalar, Scalar> degree_bounds(const AffinityGraph<Scalar>& graph) {
  return {graph.degrees().minCoeff(), graph.degrees().maxCoeff()};
}

template <typename Scalar>
Scalar volume(const AffinityGraph<Scalar>& graph, std::span<const Index> nodes) {
  Scalar total(0);
  for (const Index x : nodes) {
    if (x < 0 || x >= graph.size()) {
      throw Error(Errc::IndexOutOfRange, "node " + std::to_string(x) + " is not in the graph");
    }
    total += graph.degrees()(x);
  }
  return total;
}

template <typename Scalar>
std::vector<std::vector<Index>> connected_components(const AffinityGraph<Scalar>& graph) {
  const Index n = graph.size();
  std::vector<Index> component(std::size_t(n), -1);
  std::vector<std::vector<Index>> result;
  std::queue<Index> frontier;
  for (Index seed = 0; seed < n; ++seed) {
    if (component[std::size_t(seed)] >= 0) continue;
    const Index id = Index(result.size());
    result.emplace_back();
    component[std::size_t(seed)] = id;
    frontier.push(seed);
    while (!frontier.empty()) {
      const Index x = frontier.front();
      frontier.pop();
      result.back().push_back(x);
      for (typename SparseMatrix<Scalar>::InnerIterator it(graph.weights(), x); it; ++it) {
        if (it.value() > Scalar(0) && component[std::size_t(it.row())] < 0) {
          component[std::size_t(it.row())] = id;
          frontier.push(it.row());
        }
      }
    }
    std::sort(result.back().begin(), result.back().end());
  }
  return result;
}

template <typename Scalar>
SparseMatrix<Scalar> restrict_weights(const SparseMatrix<Scalar>& weights,
                                      std::span<const Index> nodes) {
  std::vector<Index> position(std::size_t(weights.rows()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    position[std::size_t(nodes[i])] = Index(i);
  }
  std::vector<Triplet<Scalar>> triplets;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(weights, nodes[i]); it; ++it) {
      const Index row = position[std::size_t(it.row())];
      if (row >= 0) triplets.emplace_back(row, Index(i), it.value());
    }
  }
  return from_triplets<Scalar>(Index(nodes.size()), triplets);
}

#define SEN_INSTANTIATE_GRAPH(Scalar)                                                        \
  template class AffinityGraph<Scalar>;                                                      \
  template AffinityGraph<Scalar> build_affinity<Scalar>(const Eigen::Ref<const Matrix<Scalar>>&, \
                                                        const AffinityOptions&);             \
  template DeformationPair<Scalar> split_blocks<Scalar>(const AffinityGraph<Scalar>&,        \
                                                        const Partition&);                   \
  template AffinityGraph<Scalar> deform<Scalar>(const DeformationPair<Scalar>&, Scalar);     \
  template Scalar connection_strength<Scalar>(const AffinityGraph<Scalar>&, const Partition&); \
  template std::pair<Scalar, Scalar> degree_bounds<Scalar>(const AffinityGraph<Scalar>&);    \
  template Scalar volume<Scalar>(const AffinityGraph<Scalar>&, std::span<const Index>);      \
  template std::vector<std::vector<Index>> connected_components<Scalar>(                     \
      const AffinityGraph<Scalar>&);                                                         \
  template SparseMatrix<Scalar> restrict_weights<Scalar>(const SparseMatrix<Scalar>&,        \
                                                         std::span<const Index>);

SEN_INSTANTIATE_GRAPH(float)
SEN_INSTANTIATE_GRAPH(double)

}  // namespace sen
