#include "sen/spectral.hpp"

#include "lanczos.hpp"
#include "sen/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace sen {

namespace {

template <typename Scalar>
struct Pairs {
  Vector<Scalar> values;  // descending
  Matrix<Scalar> vectors;  // orthonormal eigenvectors of D^-1/2 W D^-1/2
};

template <typename Scalar>
Matrix<Scalar> dense_normalized(const SparseMatrix<Scalar>& w, const Vector<Scalar>& s) {
  Matrix<Scalar> a = Matrix<Scalar>::Zero(w.rows(), w.cols());
  for (Index col = 0; col < w.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(w, col); it; ++it) {
      a(it.row(), col) = s(it.row()) * it.value() * s(col);
    }
  }
  return a;
}

template <typename Scalar>
Pairs<Scalar> dense_top(const Matrix<Scalar>& a, Index m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::ConvergenceFailure, "dense symmetric eigensolver failed");
  }
  return {solver.eigenvalues().tail(m).reverse(), solver.eigenvectors().rightCols(m).rowwise().reverse()};
}

template <typename Scalar>
Pairs<Scalar> krylov_top(const SparseMatrix<Scalar>& w, const Vector<Scalar>& s, Index m,
                         const SpectrumOptions<Scalar>& options) {
  detail::LanczosParams<Scalar> params;
  params.block = options.block_size;
  params.max_basis = options.max_basis;
  params.max_restarts = options.max_restarts;
  params.tolerance = options.tolerance;
  params.seed = options.seed;
  const auto apply = [&](const auto& x) -> Matrix<Scalar> {
    Matrix<Scalar> y = s.asDiagonal() * x;
    return s.asDiagonal() * (w * y);
  };
  auto result = detail::block_lanczos<Scalar>(w.rows(), m, apply, params);
  return {std::move(result.values), std::move(result.vectors)};
}

template <typename Scalar>
Pairs<Scalar> solve_block(const SparseMatrix<Scalar>& w, const Vector<Scalar>& s, Index m,
                          const SpectrumOptions<Scalar>& options) {
  const Index n = w.rows();
  bool dense = false;
  switch (options.method) {
    case SpectrumMethod::Dense: dense = true; break;
    case SpectrumMethod::Krylov: dense = false; break;
    case SpectrumMethod::Auto:
      dense = n <= options.dense_cutoff || double(m) > options.dense_fraction * double(n);
      break;
  }
  if (dense) {
    return dense_top<Scalar>(dense_normalized(w, s), m);
  }
  return krylov_top(w, s, m, options);
}

// psi = D^-1/2 u, then the sign convention.
template <typename Scalar>
EigenSystem<Scalar> finish(Vector<Scalar> values, const Matrix<Scalar>& u, const Vector<Scalar>& s,
                           const Vector<Scalar>& degrees) {
  EigenSystem<Scalar> es;
  es.eigenvalues = std::move(values);
  es.eigenvectors = s.asDiagonal() * u;
  es.degrees = degrees;
  for (Index k = 0; k < es.eigenvectors.cols(); ++k) {
    Index arg = 0;
    es.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (es.eigenvectors(arg, k) < Scalar(0)) es.eigenvectors.col(k) *= Scalar(-1);
  }
  return es;
}

}  // namespace

template <typename Scalar>
EigenSystem<Scalar> markov_spectrum(const AffinityGraph<Scalar>& graph, Index m,
                                    const SpectrumOptions<Scalar>& options) {
  const Index n = graph.size();
  if (m < 1 || m > n) {
    throw Error(Errc::OutOfRange, "m = " + std::to_string(m) + " outside 1.." + std::to_string(n));
  }
  if (!(graph.degrees().minCoeff() > Scalar(0))) {
    throw Error(Errc::NonPositiveDegree, "graph has a node of zero degree");
  }
  const Vector<Scalar> s = graph.degrees().cwiseSqrt().cwiseInverse();

  std::vector<std::vector<Index>> blocks;
  if (options.split_components) {
    blocks = connected_components(graph);
  } else {
    blocks.emplace_back(std::size_t(n));
    for (Index i = 0; i < n; ++i) blocks[0][std::size_t(i)] = i;
  }
  if (blocks.size() == 1) {
    auto pairs = solve_block(graph.weights(), s, m, options);
    return finish(std::move(pairs.values), pairs.vectors, s, graph.degrees());
  }

  struct Candidate {
    Scalar value;
    std::size_t block;
    Index column;
  };
  std::vector<Pairs<Scalar>> solved(blocks.size());
  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const auto& nodes = blocks[c];
    const Index nc = Index(nodes.size());
    const Index mc = std::min(m, nc);
    Vector<Scalar> sc(nc);
    for (Index i = 0; i < nc; ++i) sc(i) = s(nodes[std::size_t(i)]);
    solved[c] = solve_block(restrict_weights(graph.weights(), nodes), sc, mc, options);
    for (Index j = 0; j < mc; ++j) candidates.push_back({solved[c].values(j), c, j});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  Vector<Scalar> values(m);
  Matrix<Scalar> u = Matrix<Scalar>::Zero(n, m);
  for (Index k = 0; k < m; ++k) {
    const Candidate& cand = candidates[std::size_t(k)];
    values(k) = cand.value;
    const auto& nodes = blocks[cand.block];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      u(nodes[i], k) = solved[cand.block].vectors(Index(i), cand.column);
    }
  }
  return finish(std::move(values), u, s, graph.degrees());
}

template <typename Scalar>
EigenSystem<Scalar> full_spectrum(const AffinityGraph<Scalar>& graph, Index cap) {
  const Index n = graph.size();
  if (n > cap) {
    throw Error(Errc::TooLarge, "dense spectrum of " + std::to_string(n) + " nodes exceeds cap " +
                                    std::to_string(cap));
  }
  const Vector<Scalar> s = graph.degrees().cwiseSqrt().cwiseInverse();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(dense_normalized(graph.weights(), s));
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::ConvergenceFailure, "dense symmetric eigensolver failed");
  }
  return finish<Scalar>(solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse(),
                        s, graph.degrees());
}

template <typename Scalar>
Scalar i_eigen_gap(const EigenSystem<Scalar>& es, Index i_size) {
  const Index m = es.count();
  if (i_size < 1 || i_size >= m) {
    throw Error(Errc::OutOfRange, "|I| = " + std::to_string(i_size) + " needs 1 <= |I| < m = " +
                                      std::to_string(m));
  }
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  for (Index k = 0; k < i_size; ++k) {
    for (Index j = i_size; j < m; ++j) {
      gap = std::min(gap, std::abs(es.eigenvalues(k) - es.eigenvalues(j)));
    }
  }
  return gap;
}

template <typename Scalar>
Scalar d_orthonormality_residual(const EigenSystem<Scalar>& es) {
  const Matrix<Scalar> gram =
      es.eigenvectors.transpose() * es.degrees.asDiagonal() * es.eigenvectors;
  return (gram - Matrix<Scalar>::Identity(es.count(), es.count())).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Vector<Scalar> degree_rate(const SparseMatrix<Scalar>& w_dot) {
  return w_dot * Vector<Scalar>::Ones(w_dot.cols());
}

template <typename Scalar>
VariationRates<Scalar> hadamard_rates(const EigenSystem<Scalar>& es,
                                      const SparseMatrix<Scalar>& w_dot,
                                      const Vector<Scalar>& d_dot, bool want_psi_dot,
                                      Scalar gap_floor, CrossingPolicy policy) {
  const Index n = es.size();
  const Index m = es.count();
  if (w_dot.rows() != n || w_dot.cols() != n || d_dot.size() != n) {
    throw Error(Errc::SizeMismatch, "perturbation size differs from the eigensystem");
  }
  if (want_psi_dot && m != n) {
    throw Error(Errc::OutOfRange, "eigenvector rates need the full spectrum");
  }
  const Matrix<Scalar>& psi = es.eigenvectors;
  const Matrix<Scalar> mw = psi.transpose() * (w_dot * psi);
  const Matrix<Scalar> md = psi.transpose() * d_dot.asDiagonal() * psi;

  VariationRates<Scalar> rates;
  rates.lambda_dot = mw.diagonal() - es.eigenvalues.cwiseProduct(md.diagonal());
  if (!want_psi_dot) return rates;

  Matrix<Scalar> coeff = Matrix<Scalar>::Zero(m, m);
  for (Index k = 0; k < m; ++k) {
    const Scalar lk = es.eigenvalues(k);
    coeff(k, k) = Scalar(-0.5) * md(k, k);
    for (Index j = 0; j < m; ++j) {
      if (j == k) continue;
      const Scalar gap = lk - es.eigenvalues(j);
      if (std::abs(gap) < gap_floor) {
        rates.skipped.emplace_back(k, j);
        continue;
      }
      coeff(j, k) = (mw(j, k) - lk * md(j, k)) / gap;
    }
  }
  if (!rates.skipped.empty() && policy == CrossingPolicy::Throw) {
    std::ostringstream msg;
    msg << rates.skipped.size() << " eigenvalue pairs closer than " << gap_floor << ":";
    for (std::size_t i = 0; i < std::min<std::size_t>(rates.skipped.size(), 10); ++i) {
      msg << " (" << rates.skipped[i].first << "," << rates.skipped[i].second << ")";
    }
    throw Error(Errc::NearCrossing, msg.str());
  }
  rates.psi_dot = psi * coeff;
  return rates;
}

#define SEN_INSTANTIATE_SPECTRAL(Scalar)                                                       \
  template EigenSystem<Scalar> markov_spectrum<Scalar>(const AffinityGraph<Scalar>&, Index,    \
                                                       const SpectrumOptions<Scalar>&);        \
  template EigenSystem<Scalar> full_spectrum<Scalar>(const AffinityGraph<Scalar>&, Index);     \
  template Scalar i_eigen_gap<Scalar>(const EigenSystem<Scalar>&, Index);                      \
  template Scalar d_orthonormality_residual<Scalar>(const EigenSystem<Scalar>&);               \
  template Vector<Scalar> degree_rate<Scalar>(const SparseMatrix<Scalar>&);                    \
  template VariationRates<Scalar> hadamard_rates<Scalar>(                                      \
      const EigenSystem<Scalar>&, const SparseMatrix<Scalar>&, const Vector<Scalar>&, bool,    \
      Scalar, CrossingPolicy);

SEN_INSTANTIATE_SPECTRAL(float)
SEN_INSTANTIATE_SPECTRAL(double)

}  // namespace sen
