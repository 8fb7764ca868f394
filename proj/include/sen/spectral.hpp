#pragma once

#include "sen/graph.hpp"
#include "sen/types.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace sen {

/// Leading eigenpairs of the Markov matrix P = D^-1 W.
///
/// eigenvalues are sorted descending; column k of `eigenvectors` is the
/// right eigenvector psi_k, normalized so that psi_k^T D psi_j = delta_kj,
/// with its first entry of largest magnitude positive.
template <typename Scalar>
struct EigenSystem {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;
  Vector<Scalar> degrees;

  Index size() const { return eigenvectors.rows(); }
  Index count() const { return eigenvalues.size(); }
};

enum class SpectrumMethod {
  Auto,
  Dense,   // full symmetric eigensolver, top m kept
  Krylov,  // block thick-restart Lanczos
};

template <typename Scalar>
struct SpectrumOptions {
  SpectrumMethod method = SpectrumMethod::Auto;
  // Auto uses the dense path for components up to this size or when more
  // than `dense_fraction` of a component's spectrum is requested.
  Index dense_cutoff = 600;
  double dense_fraction = 0.5;
  Scalar tolerance = default_tolerance<Scalar>();  // residual norm of A u - lambda u
  Index block_size = 4;
  Index max_basis = 0;  // Krylov basis size; 0 chooses from m
  Index max_restarts = 2000;
  // Solve each connected component separately.
  bool split_components = true;
  std::uint64_t seed = 7;
};

/// Top-m eigenpairs of P via the symmetric matrix D^-1/2 W D^-1/2.
/// Throws OutOfRange unless 1 <= m <= n and ConvergenceFailure when the
/// iterative solver exhausts its restarts.
template <typename Scalar>
EigenSystem<Scalar> markov_spectrum(const AffinityGraph<Scalar>& graph, Index m,
                                    const SpectrumOptions<Scalar>& options = {});

/// All n eigenpairs from a dense symmetric eigensolver. Throws TooLarge when
/// n exceeds `cap`.
template <typename Scalar>
EigenSystem<Scalar> full_spectrum(const AffinityGraph<Scalar>& graph, Index cap = 3000);

/// min over k < i_size <= j of |lambda_k - lambda_j| (0-based k, j).
/// Throws OutOfRange unless 1 <= i_size < m.
template <typename Scalar>
Scalar i_eigen_gap(const EigenSystem<Scalar>& es, Index i_size);

/// max_{k,j} |psi_k^T D psi_j - delta_kj|.
template <typename Scalar>
Scalar d_orthonormality_residual(const EigenSystem<Scalar>& es);

enum class CrossingPolicy { Throw, Skip };

template <typename Scalar>
struct VariationRates {
  Vector<Scalar> lambda_dot;
  std::optional<Matrix<Scalar>> psi_dot;
  // (k, j) pairs whose eigenvalue gap fell below the floor.
  std::vector<std::pair<Index, Index>> skipped;
};

/// lambda_dot_k = psi_k^T (W' - lambda_k D') psi_k and, on request,
///   psi_dot_k = -1/2 (psi_k^T D' psi_k) psi_k
///             + sum_{j != k} psi_j^T (W' - lambda_k D') psi_k / (lambda_k - lambda_j) psi_j.
/// The eigenvector rates need the full spectrum (OutOfRange otherwise).
/// Terms with |lambda_k - lambda_j| < gap_floor are dropped; under
/// CrossingPolicy::Throw their presence raises NearCrossing.
template <typename Scalar>
VariationRates<Scalar> hadamard_rates(const EigenSystem<Scalar>& es,
                                      const SparseMatrix<Scalar>& w_dot,
                                      const Vector<Scalar>& d_dot, bool want_psi_dot,
                                      Scalar gap_floor = Scalar(1e-8),
                                      CrossingPolicy policy = CrossingPolicy::Throw);

/// Row sums of a symmetric perturbation, i.e. the diagonal of D'.
template <typename Scalar>
Vector<Scalar> degree_rate(const SparseMatrix<Scalar>& w_dot);

}  // namespace sen
