#include "sen/diagnostics.hpp"
#include "sen/errors.hpp"
#include "sen/graph.hpp"
#include "sen/random.hpp"
#include "sen/spectral.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sen;
using sen::fixtures::graph_from_dense;
using sen::fixtures::random_two_block;
using sen::fixtures::to_sparse;

namespace {

template <typename F>
void expect_code(Errc code, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Background: a complete graph on nb nodes (all degrees equal). Clusters:
// K cliques of `size` nodes with weight `cw`, no cross edges.
struct CliqueSetup {
  Matrix<double> w;
  std::vector<int> labels;
};

CliqueSetup cliques(Index nb, double bw, int k, Index size, double cw) {
  const Index n = nb + Index(k) * size;
  CliqueSetup s;
  s.w = Matrix<double>::Zero(n, n);
  s.w.topLeftCorner(nb, nb).setConstant(bw);
  s.labels.assign(std::size_t(n), 0);
  for (int c = 0; c < k; ++c) {
    const Index start = nb + Index(c) * size;
    s.w.block(start, start, size, size).setConstant(cw);
    for (Index j = 0; j < size; ++j) s.labels[std::size_t(start + j)] = c + 1;
  }
  return s;
}

}  // namespace

TEST(Classify, DisconnectedCliquesHaveExactSupport) {
  const auto s = cliques(10, 1.0, 1, 6, 1.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = markov_spectrum(g, 16);
  const auto tags = classify_initial_eigenvectors(g, es, part, 16);
  for (Index k = 0; k < 16; ++k) {
    double mass = 0.0;
    for (Index x = 10; x < 16; ++x) mass += std::pow(es.eigenvectors(x, k), 2) * g.degrees()(x);
    EXPECT_TRUE(std::abs(mass) < 1e-10 || std::abs(mass - 1.0) < 1e-10);
    EXPECT_EQ(tags[std::size_t(k)] == Support::Cluster, mass > 0.5);
  }
}

TEST(Classify, RejectsCrossEdges) {
  auto s = cliques(5, 1.0, 1, 3, 1.0);
  s.w(0, 6) = s.w(6, 0) = 0.1;
  const auto g = graph_from_dense(s.w);
  const auto es = markov_spectrum(g, 4);
  expect_code(Errc::NotBlockDiagonal,
              [&] { classify_initial_eigenvectors(g, es, Partition::from_labels(s.labels), 3); });
}

TEST(Classify, RandomTwoBlockMatchesMassOracle) {
  Rng rng(80);
  for (int trial = 0; trial < 10; ++trial) {
    const auto tb = random_two_block(20, 2, 4, 0.5, 0.3, 0.3, rng);
    const auto pair = tb.pair();
    const auto part = tb.partition();
    const auto es = markov_spectrum(pair.w0, 28);
    const auto tags = classify_initial_eigenvectors(pair.w0, es, part, 28);
    const auto oracle = fixtures::dense_oracle(tb.w0);
    // count of cluster-supported eigenvectors equals the cluster size
    int clusters = 0;
    for (auto t : tags) clusters += t == Support::Cluster;
    int oracle_clusters = 0;
    const Vector<double> d = tb.w0.rowwise().sum();
    for (Index k = 0; k < 28; ++k) {
      double mass = 0.0;
      for (Index x = 20; x < 28; ++x) mass += oracle.vectors(x, k) * oracle.vectors(x, k) * d(x);
      oracle_clusters += mass > 0.5;
    }
    EXPECT_EQ(clusters, 8);
    EXPECT_EQ(oracle_clusters, 8);
  }
}

TEST(EstimateEps, PerfectCliquesGiveZeroEps1) {
  const auto s = cliques(20, 1.0, 3, 4, 1.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = markov_spectrum(g, 8);
  const auto est = estimate_eps(g, es, part, 4);  // three cluster constants and the background one
  EXPECT_EQ(est.k_in_i, 3);
  EXPECT_LE(est.eps1, 1e-8);
  EXPECT_LE(est.eps2, 1e-8);
  EXPECT_FALSE(est.assignment_ambiguous);
  ASSERT_EQ(est.classification.size(), 4u);
}

TEST(EstimateEps, SingleBackgroundNode) {
  const auto s = cliques(1, 2.0, 1, 5, 1.0);
  const auto g = graph_from_dense(s.w);
  const auto es = markov_spectrum(g, 3);
  const auto est = estimate_eps(g, es, Partition::from_labels(s.labels), 2);
  EXPECT_EQ(est.eps2, 0.0);
  EXPECT_EQ(est.k_in_i, 1);
}

TEST(TheoryReport, MatchesDirectFormulas) {
  Rng rng(81);
  const auto tb = random_two_block(40, 2, 5, 0.6, 0.1, 0.05, rng);
  const auto pair = tb.pair();
  const auto part = tb.partition();
  const auto g = tb.full();
  const Index i = 3;
  const auto es0 = markov_spectrum(pair.w0, 10);
  const auto est = estimate_eps(pair.w0, es0, part, i);
  const auto r = theory_report(g, part, es0, est, i);

  const double n = 50, K = 2, delta = 10.0 / 50.0;
  const Vector<double> d0 = tb.w0.rowwise().sum();
  const double du = d0.minCoeff(), dov = d0.maxCoeff();
  const double c = tb.e.block(0, 40, 40, 10).sum();
  const double gap = es0.eigenvalues(i - 1) - es0.eigenvalues(i);
  const double pound = du * (1 - est.eps1) / dov - delta / (1 - delta) * (i - K) / K * (1 + est.eps2);
  EXPECT_NEAR(r.d_under, du, 1e-12);
  EXPECT_NEAR(r.d_over, dov, 1e-12);
  EXPECT_NEAR(r.c_strength, c, 1e-12);
  EXPECT_NEAR(r.delta0_gap, gap, 1e-10);
  EXPECT_NEAR(r.delta_cap, gap / 2, 1e-10);
  EXPECT_NEAR(r.pound, pound, 1e-12);
  EXPECT_NEAR(r.g0, (K / delta) * pound / (n * du), 1e-12);
  EXPECT_NEAR(r.s_upper0, (K / delta) * (1 + 2 * est.eps1) / (n * du), 1e-12);
  EXPECT_EQ(r.a2_ok, pound > 0);
  EXPECT_NEAR(r.c_tilde, (1 + 4 / r.delta_cap) * 2 * c / du, 1e-9);
  // equal cluster sizes: the per-cluster gap reduces to the common one
  EXPECT_NEAR(r.g_min0, r.g0, 1e-12);
  ASSERT_EQ(r.per_cluster_g.size(), 2u);
  EXPECT_NEAR(r.per_cluster_g[0], r.per_cluster_g[1], 1e-15);
}

TEST(TheoryReport, BlockDiagonalPassesConditionTwo) {
  const auto s = cliques(30, 1.0, 2, 3, 2.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = markov_spectrum(g, 8);
  const auto est = estimate_eps(g, es, part, 3);
  const auto r = theory_report(g, part, es, est, 3);
  EXPECT_EQ(r.c_strength, 0.0);
  EXPECT_TRUE(r.a2_ok);
  EXPECT_TRUE(r.cond_i_ok);
  EXPECT_TRUE(r.cond_ii_ok);
}

TEST(TheoryReport, ExplicitDeltaCap) {
  const auto s = cliques(30, 1.0, 1, 3, 2.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = markov_spectrum(g, 5);
  const auto est = estimate_eps(g, es, part, 2);
  const auto r = theory_report(g, part, es, est, 2, 10.0);
  EXPECT_EQ(r.delta_cap, 10.0);
  EXPECT_FALSE(r.cond_i_ok);
}

TEST(InitialBounds, PerfectCliquesSatisfyBounds) {
  const auto s = cliques(40, 1.0, 2, 4, 10.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = markov_spectrum(g, 6);
  const auto est = estimate_eps(g, es, part, 3);
  const auto r = theory_report(g, part, es, est, 3);
  const auto check = verify_prop31(es, part, r, 3);
  EXPECT_TRUE(check.ok);
  EXPECT_TRUE(check.violations.empty());
  EXPECT_GT(r.g0, 0.0);
}

TEST(InitialBounds, HugeIReportsNoSeparation) {
  const auto s = cliques(30, 1.0, 1, 6, 1.0);
  const auto g = graph_from_dense(s.w);
  const Partition part = Partition::from_labels(s.labels);
  const auto es = full_spectrum(g);
  const Index i = 30;
  const auto est = estimate_eps(g, es, part, i);
  const auto r = theory_report(g, part, es, est, i);
  EXPECT_LE(r.g0, 0.0);
  EXPECT_FALSE(r.a2_ok);
  const auto check = verify_prop31(es, part, r, i);
  EXPECT_FALSE(check.violations.empty());
}

TEST(TraceDynamics, ZeroPerturbationIsConstant) {
  const auto s = cliques(12, 1.0, 1, 4, 1.0);
  const DeformationPair<double> pair{graph_from_dense(s.w), SparseMatrix<double>(16, 16)};
  const auto tr = trace_dynamics(pair, Partition::from_labels(s.labels), 5, 4, 2);
  ASSERT_EQ(tr.t_grid.size(), 5);
  EXPECT_EQ(tr.t_grid(0), 0.0);
  EXPECT_EQ(tr.t_grid(4), 1.0);
  for (Index step = 1; step < 5; ++step) {
    EXPECT_LT((tr.sorted_eigenvalues.col(step) - tr.sorted_eigenvalues.col(0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((tr.s_series.col(step) - tr.s_series.col(0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(tr.gap_series(step), tr.gap_series(0), 1e-12);
  }
  EXPECT_TRUE(tr.drift_ok);
  EXPECT_EQ(tr.c_strength, 0.0);
}

TEST(TraceDynamics, DriftBoundOnRandomInstances) {
  Rng rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const auto tb = random_two_block(24, 1, 6, 0.5, 0.3, 0.5, rng);
    const auto tr = trace_dynamics(tb.pair(), tb.partition(), 11, 8, 3);
    EXPECT_TRUE(tr.drift_ok);
    EXPECT_LE(tr.max_drift_ratio, 1.0);
    EXPECT_GT(tr.min_overlap, 0.0);
    EXPECT_EQ(tr.eigenvalue_branches.rows(), 8);
  }
}

TEST(TraceDynamics, ComputesAtLeastISizePlusOne) {
  Rng rng(83);
  const auto tb = random_two_block(20, 1, 5, 0.5, 0.2, 0.2, rng);
  const auto tr = trace_dynamics(tb.pair(), tb.partition(), 3, 2, 6);
  EXPECT_EQ(tr.eigenvalue_branches.rows(), 7);
  expect_code(Errc::OutOfRange, [&] { trace_dynamics(tb.pair(), tb.partition(), 1, 2, 6); });
}

TEST(SEvolution, ZeroPerturbation) {
  Rng rng(84);
  const auto tb = random_two_block(20, 1, 5, 0.6, 0.0, 0.0, rng);
  const auto check = verify_s_evolution(tb.pair(), 0.5, 2, 1e-5);
  EXPECT_EQ(check.predicted.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(check.finite_difference.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SEvolution, MatchesFiniteDifferences) {
  Rng rng(85);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto tb = random_two_block(24, 1, 6, 0.5, 0.3, 0.5, rng);
    const auto pair = tb.pair();
    const auto es = full_spectrum(graph_from_dense(tb.w0 + 0.5 * tb.e));
    // the evolution equation needs a gap at the cut
    Index i = 2;
    for (Index c = 2; c < 10; ++c) {
      if (i_eigen_gap(es, c) > i_eigen_gap(es, i)) i = c;
    }
    for (const auto& w : {WeightSpec::constant(), WeightSpec::power(2), WeightSpec::heat(1.5)}) {
      const auto check = verify_s_evolution(pair, 0.5, i, 1e-5, w);
      EXPECT_LT(check.max_rel_error, 1e-3) << "weight " << w.to_string() << " i " << i;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 10);
}

TEST(SEvolution, GapTooSmall) {
  // identical disconnected halves joined by a cross edge: repeated eigenvalues
  Matrix<double> half = Matrix<double>::Constant(4, 4, 1.0);
  Matrix<double> w0 = Matrix<double>::Zero(8, 8);
  w0.topLeftCorner(4, 4) = half;
  w0.bottomRightCorner(4, 4) = half;
  Matrix<double> e = Matrix<double>::Zero(8, 8);
  const DeformationPair<double> pair{graph_from_dense(w0), to_sparse(e)};
  expect_code(Errc::GapTooSmall, [&] { verify_s_evolution(pair, 0.5, 1, 1e-5); });
}
