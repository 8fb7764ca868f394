#pragma once

#include "sen/graph.hpp"
#include "sen/norm.hpp"
#include "sen/spectral.hpp"
#include "sen/types.hpp"

#include <limits>
#include <string>
#include <vector>

namespace sen {

enum class Support { Background, Cluster };

/// Assumption constants measured on the t = 0 spectrum.
struct AssumptionEstimate {
  double eps1 = 0.0;
  double eps2 = 0.0;
  Index k_in_i = 0;  // cluster-supported eigenvectors inside I
  std::vector<Support> classification;  // one tag per index in I
  // Cluster j (1..K) assigned to each cluster-supported index in I, 0 otherwise.
  std::vector<int> assigned_cluster;
  // Two eigenvectors were assigned the same cluster.
  bool assignment_ambiguous = false;
};

/// Tags eigenvector k < i_size as cluster-supported when its D-mass on C
/// exceeds mass_threshold. Throws NotBlockDiagonal when g0 has a
/// cross-block weight above 1e-12.
template <typename Scalar>
std::vector<Support> classify_initial_eigenvectors(const AffinityGraph<Scalar>& g0,
                                                   const EigenSystem<Scalar>& es0,
                                                   const Partition& part, Index i_size,
                                                   double mass_threshold = 0.5);

/// Smallest eps1, eps2 for which the per-cluster and background bounds
/// hold on I, assigning each cluster eigenvector to the cluster carrying
/// most of its mass.
template <typename Scalar>
AssumptionEstimate estimate_eps(const AffinityGraph<Scalar>& g0, const EigenSystem<Scalar>& es0,
                                const Partition& part, Index i_size,
                                double mass_threshold = 0.5);

struct TheoryReport {
  Index n = 0;
  int k_clusters = 0;
  Index i_size = 0;
  double delta = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  Index k_in_i = 0;
  double d_under = 0.0;
  double d_over = 0.0;
  double c_strength = 0.0;
  double delta0_gap = 0.0;
  double delta_cap = 0.0;
  double pound = 0.0;
  double g0 = 0.0;
  double s_upper0 = 0.0;
  bool a2_ok = false;
  // The assumption inequality as printed, with (1 - eps2) / (1 + eps1).
  bool a2_literal_ok = false;
  bool cond_i_ok = false;
  bool cond_ii_ok = false;
  double cond_ii_lhs = 0.0;
  double cond_ii_rhs = 0.0;
  double c_tilde = 0.0;
  std::vector<double> per_cluster_g;
  double g_min0 = 0.0;
  double s_bar0 = 0.0;
  bool eq20_ok = false;
};

/// Fills the separation constants from the t = 0 spectrum and the full
/// graph. delta_cap is the constant Delta of the separation theorem; a NaN
/// selects Delta(0) / 2. Requires i_size < es0.count().
template <typename Scalar>
TheoryReport theory_report(const AffinityGraph<Scalar>& graph, const Partition& part,
                           const EigenSystem<Scalar>& es0, const AssumptionEstimate& est,
                           Index i_size,
                           double delta_cap = std::numeric_limits<double>::quiet_NaN());

struct BoundCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks the measured S(x, 0) against the initial-separation bounds
/// (per-cluster form, which reduces to the equal-size one), the background
/// bound and the supremum bound.
template <typename Scalar>
BoundCheck verify_prop31(const EigenSystem<Scalar>& es0, const Partition& part,
                         const TheoryReport& report, Index i_size);

struct DynamicsTrace {
  Vector<double> t_grid;
  Matrix<double> eigenvalue_branches;  // m x T, branch k starts at sorted index k
  Matrix<double> sorted_eigenvalues;   // m x T
  Matrix<double> s_series;             // n x T, constant weight, top i_size
  Vector<double> gap_series;           // Delta(t) over tracked branches
  double c_strength = 0.0;
  double d_under = 0.0;
  double delta0 = 0.0;
  double min_overlap = 1.0;  // smallest matched overlap between steps
  double max_drift_ratio = 0.0;  // max |lambda_k(t) - lambda_k(0)| / (4 C t / d_under)
  bool drift_ok = true;
  bool gap_premise = false;  // C / d_under <= Delta(0) / 16
  bool gap_preserved = true;  // min_t Delta(t) >= Delta(0) / 2
};

/// Spectra of W(t) on a uniform grid of t_steps points in [0, 1], with
/// branches matched greedily by D-weighted eigenvector overlap. At least
/// i_size + 1 eigenpairs are computed.
template <typename Scalar>
DynamicsTrace trace_dynamics(const DeformationPair<Scalar>& pair, const Partition& part,
                             Index t_steps, Index m, Index i_size,
                             const SpectrumOptions<Scalar>& options = {});

struct EvolutionCheck {
  double max_rel_error = 0.0;
  Vector<double> predicted;  // right-hand side of the evolution equation
  Vector<double> finite_difference;
};

/// Compares the evolution equation of the (weighted) embedding norm at
/// time t with the centred difference (S(t + h) - S(t - h)) / 2h. The error
/// is max_x |rhs - fd| / max_x |fd|. Needs a dense spectrum; throws
/// GapTooSmall when the I-gap is under 10 times the eigenvalue motion over
/// one step.
template <typename Scalar>
EvolutionCheck verify_s_evolution(const DeformationPair<Scalar>& pair, double t, Index i_size,
                                  double fd_step, const WeightSpec& weight = {});

/// Right-hand side of the evolution equation for S from a full spectrum.
template <typename Scalar>
Vector<double> s_evolution_rhs(const EigenSystem<Scalar>& es, const SparseMatrix<Scalar>& w_dot,
                               Index i_size, const WeightSpec& weight = {});

}  // namespace sen
