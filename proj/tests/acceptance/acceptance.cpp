// Acceptance suite: one PASS/FAIL line per criterion.
//
//   sen_acceptance                 run every criterion
//   sen_acceptance --criterion 4   run one
//
// Exit status is 0 only when every selected criterion passes.

#include "sen/datagen.hpp"
#include "sen/diagnostics.hpp"
#include "sen/errors.hpp"
#include "sen/graph.hpp"
#include "sen/norm.hpp"
#include "sen/random.hpp"
#include "sen/spectral.hpp"

#include "support.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

using namespace sen;
using namespace sen::fixtures;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Every eigensystem produced here goes through `recorded` so criterion 5
// can report the worst D-orthonormality residual seen in this process.
double g_worst_residual = 0.0;
Index g_recorded = 0;

template <typename ES>
const ES& recorded(const ES& es) {
  g_worst_residual = std::max(g_worst_residual, double(d_orthonormality_residual(es)));
  ++g_recorded;
  return es;
}

Vector<double> s_of(const EigenSystem<double>& es, Index i) { return embedding_norm(es, i).s; }

double separation_margin(const Vector<double>& s, const Partition& part) {
  double min_c = INFINITY, max_b = -INFINITY;
  for (Index x = 0; x < part.size(); ++x) {
    if (part.in_cluster(x)) min_c = std::min(min_c, s(x));
    else max_b = std::max(max_b, s(x));
  }
  return min_c - max_b;
}

// 1. toy sweep

Outcome toy_sweep() {
  const PointCloud cloud = gen_circle_clusters({});
  bool pass = true;
  std::string detail;
  for (const Index k_st : {4, 8, 16}) {
    const auto start = Clock::now();
    AffinityOptions ao;
    ao.k_st = k_st;
    const auto g = build_affinity<double>(cloud.points, ao);
    const auto es = recorded(markov_spectrum(g, 100));
    const auto rows = sweep_i(es, 2, 100, WeightSpec::constant(), 0.9, cloud.truth);
    const double secs = seconds_since(start);

    double best = 0.0;
    Index best_i = 0;
    for (const auto& r : rows) {
      if (r.f1 > best) {
        best = r.f1;
        best_i = r.i_size;
      }
    }
    // longest run of near-best values, over the whole range and inside 25..60
    Index run = 0, longest = 0, run_in = 0, longest_in = 0, first = 0, last = 0, start_i = 0;
    for (const auto& r : rows) {
      const bool near = r.f1 >= best - 0.05;
      if (near) {
        if (run == 0) start_i = r.i_size;
        ++run;
      } else {
        run = 0;
      }
      if (run > longest) {
        longest = run;
        first = start_i;
        last = r.i_size;
      }
      const bool inside = r.i_size >= 25 && r.i_size <= 60;
      run_in = near && inside ? run_in + 1 : 0;
      longest_in = std::max(longest_in, run_in);
    }
    bool ok = best >= 0.95 && longest >= 8 && secs <= 180.0;
    if (k_st == 8) ok = ok && longest_in >= 8;
    pass = pass && ok;
    detail += fmt::format("{}k_st={}: best F1 {:.4f} at i={}, plateau {}..{} ({} values, {} inside 25..60), {:.1f}s",
                          detail.empty() ? "" : "; ",
                          k_st, best, best_i, first, last, longest, longest_in, secs);
  }
  return {pass, detail};
}

// 2. single-cluster separation

Outcome single_cluster() {
  CircleClusterOptions o;
  o.k_clusters = 1;
  o.delta = 0.01;
  const PointCloud cloud = gen_circle_clusters(o);
  const Partition part = Partition::from_labels(cloud.cluster_id);
  AffinityOptions ao;
  ao.dense = true;
  const auto g = build_affinity<double>(cloud.points, ao);
  const auto tr = trace_dynamics(split_blocks(g, part), part, 21, 8, 40);
  const double margin = separation_margin(tr.s_series.col(tr.s_series.cols() - 1), part);
  const double lambda8 = tr.sorted_eigenvalues.row(7).minCoeff();
  // independent check of the t = 1 norm on the observed graph
  const double direct = separation_margin(s_of(recorded(markov_spectrum(g, 40)), 40), part);
  const bool pass = margin > 0.0 && direct > 0.0 && lambda8 > 0.998 - 0.001;
  return {pass, fmt::format("margin at t=1 {:.4e} (direct {:.4e}), min over t of lambda_8 {:.6f}, "
                            "min overlap {:.4f}",
                            margin, direct, lambda8, tr.min_overlap)};
}

// 3. image experiment

Outcome image_experiment() {
  const auto start = Clock::now();
  const SyntheticImage img = gen_stripe_image(200);
  const PatchSet ps = extract_patches(img.pixels, 9, 3);
  PointCloud cloud = ps.cloud;
  cloud.truth = label_patches(img, ps.centers, 0.01);
  AffinityOptions ao;
  ao.k_nn = 64;
  ao.k_st = 32;
  const Index trials = 100, i_min = 100, i_max = 400;
  Matrix<double> f1(i_max - i_min + 1, trials);
  double trial_best = 0.0;
  for (Index trial = 0; trial < trials; ++trial) {
    Rng rng(1, std::uint64_t(trial));
    const PointCloud sub = select_rows(cloud, subsample_indices(cloud.size(), 3000, rng));
    const auto es = recorded(markov_spectrum(build_affinity<double>(sub.points, ao), i_max));
    const auto rows = sweep_i(es, i_min, i_max, WeightSpec::constant(), 0.99, sub.truth);
    double best = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      f1(Index(r), trial) = rows[r].f1;
      best = std::max(best, rows[r].f1);
    }
    trial_best += best / double(trials);
  }
  const Vector<double> mean = f1.rowwise().mean();
  Index arg = 0;
  const double best = mean.maxCoeff(&arg);
  const double secs = seconds_since(start);
  const bool pass = best >= 0.78 && best <= 0.92 && i_min + arg >= 180 && i_min + arg <= 280 &&
                    secs <= 1800.0;
  return {pass, fmt::format("{} patches, {} positives; best mean F1 {:.4f} at i={}, mean of per-trial "
                            "best {:.4f}, {:.0f}s",
                            cloud.size(), cloud.truth.count(), best, i_min + arg, trial_best, secs)};
}

// Random graph family for the property criteria: half Bernoulli weights,
// half self-tuning kNN graphs on Gaussian point clouds.
AffinityGraph<double> random_instance(Rng& rng, Index n_max, int index) {
  const Index n = 20 + Index(rng.below(n_max - 19));
  if (index % 2 == 0) return random_graph(n, 0.05 + 0.5 * rng.uniform(), rng);
  Matrix<double> pts(n, 3);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 3; ++c) pts(i, c) = rng.normal();
  AffinityOptions ao;
  ao.k_nn = std::min<Index>(15, n - 1);
  ao.k_st = 5;
  return build_affinity<double>(pts, ao);
}

// 4. full-sum identity

Outcome full_sum() {
  Rng rng(4);
  double worst = 0.0;
  for (int g_idx = 0; g_idx < 50; ++g_idx) {
    const auto g = random_instance(rng, 300, g_idx);
    const auto es = recorded(full_spectrum(g));
    const Vector<double> s = s_of(es, g.size());
    worst = std::max(worst, (s.array() * g.degrees().array() - 1.0).abs().maxCoeff());
  }
  return {worst < 1e-8, fmt::format("50 graphs, max |S d - 1| = {:.3e}", worst)};
}

// 5. D-orthonormality

Outcome d_orthonormality() {
  Rng rng(5);
  for (int g_idx = 0; g_idx < 40; ++g_idx) {
    const auto g = random_instance(rng, 400, g_idx);
    const Index m = std::min<Index>(g.size(), 1 + Index(rng.below(40)));
    SpectrumOptions<double> dense_opts, krylov_opts;
    dense_opts.method = SpectrumMethod::Dense;
    krylov_opts.method = SpectrumMethod::Krylov;
    recorded(markov_spectrum(g, m, dense_opts));
    if (m < g.size() / 2) recorded(markov_spectrum(g, m, krylov_opts));
    recorded(full_spectrum(g));
  }
  // disconnected: several components solved separately
  for (int g_idx = 0; g_idx < 10; ++g_idx) {
    Matrix<double> w = Matrix<double>::Zero(90, 90);
    for (Index b = 0; b < 3; ++b) w.block(30 * b, 30 * b, 30, 30) = random_weights(30, 0.3, rng);
    recorded(markov_spectrum(graph_from_dense(w), 12));
  }
  const auto toy = build_affinity<double>(gen_circle_clusters({}).points, AffinityOptions{});
  recorded(markov_spectrum(toy, 100));
  return {g_worst_residual < 1e-8,
          fmt::format("{} eigensystems, worst |Psi^T D Psi - I| = {:.3e}", g_recorded, g_worst_residual)};
}

// 6. rotation invariance

Outcome rotation() {
  Rng rng(6);
  double worst = 0.0;
  for (int g_idx = 0; g_idx < 100; ++g_idx) {
    const auto g = random_instance(rng, 200, g_idx);
    const Index i = 2 + Index(rng.below(std::min<Index>(g.size() - 2, 30)));
    const auto es = recorded(markov_spectrum(g, i));
    Matrix<double> z(i, i);
    for (Index r = 0; r < i; ++r)
      for (Index c = 0; c < i; ++c) z(r, c) = rng.normal();
    const Matrix<double> q = Eigen::HouseholderQR<Matrix<double>>(z).householderQ();
    EigenSystem<double> rotated = es;
    rotated.eigenvectors = es.eigenvectors * q;
    worst = std::max(worst, (s_of(es, i) - s_of(rotated, i)).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-10, fmt::format("100 graphs, max |dS| = {:.3e}", worst)};
}

// 7. Hadamard verification

Outcome hadamard() {
  Rng rng(7);
  const double h = 1e-5;
  double worst_lambda = 0.0, worst_s = 0.0;
  int grid_checked = 0, grid_skipped = 0, s_checked = 0, s_skipped = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto tb = random_two_block(24, 1, 6, 0.3 + 0.5 * rng.uniform(), 0.3, 0.5, rng);
    const SparseMatrix<double> e = to_sparse(tb.e);
    const auto pair = tb.pair();
    for (const double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const auto es = recorded(full_spectrum(graph_from_dense(tb.w0 + t * tb.e)));
      const Index n = es.count();
      const Vector<double> gaps = (es.eigenvalues.head(n - 1) - es.eigenvalues.tail(n - 1)).cwiseAbs();
      if (gaps.minCoeff() <= 1e-4) {
        ++grid_skipped;
        continue;
      }
      const auto rates = hadamard_rates(es, e, degree_rate(e), false);
      const DenseOracle up = dense_oracle(tb.w0 + (t + h) * tb.e);
      const DenseOracle dn = dense_oracle(tb.w0 + (t - h) * tb.e);
      const Vector<double> fd = (up.values - dn.values) / (2 * h);
      worst_lambda = std::max(worst_lambda,
                              (rates.lambda_dot - fd).cwiseAbs().maxCoeff() / fd.cwiseAbs().maxCoeff());
      ++grid_checked;

      Index i = 2;
      for (Index c = 3; c <= 10; ++c) {
        if (i_eigen_gap(es, c) > i_eigen_gap(es, i)) i = c;
      }
      for (const auto& w : {WeightSpec::constant(), WeightSpec::power(2)}) {
        try {
          worst_s = std::max(worst_s, verify_s_evolution(pair, t, i, h, w).max_rel_error);
          ++s_checked;
        } catch (const Error& err) {
          if (err.code() != Errc::GapTooSmall) throw;
          ++s_skipped;
        }
      }
    }
  }
  const bool pass = grid_checked > 0 && s_checked > 0 && worst_lambda <= 1e-3 && worst_s <= 1e-3;
  return {pass, fmt::format("lambda_dot: {} grid points (skipped {} near-degenerate), max rel err {:.3e}; "
                            "S evolution: {} checks (skipped {} for small gap), max rel err {:.3e}",
                            grid_checked, grid_skipped, worst_lambda, s_checked, s_skipped, worst_s)};
}

// 8. drift bound, recomputed here from the raw trace

Outcome drift() {
  Rng rng(8);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const Index nb = 20 + Index(rng.below(30));
    const int k = 1 + int(rng.below(3));
    const Index size = 3 + Index(rng.below(6));
    const auto tb = random_two_block(nb, k, size, 0.3 + 0.6 * rng.uniform(), 0.1 + 0.4 * rng.uniform(),
                                     0.05 + rng.uniform(), rng);
    const auto tr = trace_dynamics(tb.pair(), tb.partition(), 11, 8, 3);
    const Index nbg = nb;
    const double c = tb.e.topRightCorner(nbg, tb.e.cols() - nbg).sum();
    const double d_under = tb.w0.rowwise().sum().minCoeff();
    for (Index step = 0; step < tr.t_grid.size(); ++step) {
      const double bound = 4.0 * c * tr.t_grid(step) / d_under;
      for (Index r = 0; r < tr.sorted_eigenvalues.rows(); ++r) {
        const double disp = std::abs(tr.sorted_eigenvalues(r, step) - tr.sorted_eigenvalues(r, 0));
        if (disp > bound + 1e-12) ++violations;
        if (bound > 0) worst_ratio = std::max(worst_ratio, disp / bound);
      }
    }
  }
  return {violations == 0,
          fmt::format("200 traces, {} violations, largest displacement / bound = {:.3f}", violations, worst_ratio)};
}

// 9. gap preservation

Outcome gap_preservation() {
  Rng rng(9);
  int violations = 0, instances = 0;
  double worst = INFINITY;
  while (instances < 100) {
    auto tb = random_two_block(30 + Index(rng.below(20)), 1 + int(rng.below(2)), 4 + Index(rng.below(4)),
                               0.5, 0.4, 1.0, rng);
    const auto g0 = graph_from_dense(tb.w0);
    const auto es0 = full_spectrum(g0);
    Index i = 2;
    for (Index c = 3; c <= 8; ++c) {
      if (i_eigen_gap(es0, c) > i_eigen_gap(es0, i)) i = c;
    }
    const double delta0 = i_eigen_gap(es0, i);
    const Index nb = Index(std::count(tb.labels.begin(), tb.labels.end(), 0));
    const double c = tb.e.topRightCorner(nb, tb.e.cols() - nb).sum();
    if (delta0 <= 1e-6 || c == 0.0) continue;
    // scale E so that C / d_under sits below Delta(0) / 16
    const double d_under = tb.w0.rowwise().sum().minCoeff();
    tb.e *= (0.2 + 0.8 * rng.uniform()) * delta0 / 16.0 * d_under / c;
    ++instances;

    const auto tr = trace_dynamics(tb.pair(), tb.partition(), 21, i + 1, i);
    // independent gap from the full sorted spectrum at every grid point
    double min_gap = INFINITY;
    for (Index step = 0; step < tr.t_grid.size(); ++step) {
      const DenseOracle o = dense_oracle(tb.w0 + tr.t_grid(step) * tb.e);
      min_gap = std::min(min_gap, o.values(i - 1) - o.values(i));
    }
    const double ratio = std::min(min_gap, tr.gap_series.minCoeff()) / delta0;
    worst = std::min(worst, ratio);
    if (!tr.gap_premise || !tr.gap_preserved || ratio < 0.5) ++violations;
  }
  return {violations == 0,
          fmt::format("{} instances, {} violations, smallest min_t gap / gap(0) = {:.4f}", instances, violations,
                      worst)};
}

// 10. separation theorem end to end. Generator: a dense background with
// mildly varying weights, K strongly bound cliques and tiny cross weights.

struct Instance {
  Matrix<double> w;
  std::vector<int> labels;
  Index i_size = 0;
};

Instance separated_instance(Rng& rng) {
  const Index nb = 60 + Index(rng.below(60));
  const int k = 1 + int(rng.below(3));
  std::vector<Index> sizes;
  Index n = nb;
  for (int c = 0; c < k; ++c) {
    sizes.push_back(3 + Index(rng.below(4)));
    n += sizes.back();
  }
  Instance inst;
  inst.w = Matrix<double>::Zero(n, n);
  inst.labels.assign(std::size_t(n), 0);
  for (Index a = 0; a < nb; ++a)
    for (Index b = a; b < nb; ++b) inst.w(a, b) = inst.w(b, a) = 1.0 + 0.1 * rng.uniform();
  Index start = nb;
  for (int c = 0; c < k; ++c) {
    const Index sz = sizes[std::size_t(c)];
    const double cw = 20.0 + 10.0 * rng.uniform();
    for (Index a = start; a < start + sz; ++a) {
      inst.labels[std::size_t(a)] = c + 1;
      for (Index b = a; b < start + sz; ++b) inst.w(a, b) = inst.w(b, a) = cw * (1.0 + 0.1 * rng.uniform());
    }
    start += sz;
  }
  const double cross = 1e-5 * rng.uniform();
  for (Index a = 0; a < nb; ++a) {
    for (Index b = nb; b < n; ++b) {
      if (rng.uniform() < 0.2) inst.w(a, b) = inst.w(b, a) = cross * rng.uniform();
    }
  }
  inst.i_size = Index(k) + 1;  // the K cluster modes plus the background constant
  return inst;
}

Outcome separation_theorem() {
  Rng rng(10);
  int candidates = 0, qualifying = 0, separated = 0;
  double worst_margin = INFINITY;
  while (qualifying < 25 && candidates < 500) {
    ++candidates;
    const Instance inst = separated_instance(rng);
    const auto g = graph_from_dense(inst.w);
    const Partition part = Partition::from_labels(inst.labels);
    const auto pair = split_blocks(g, part);
    const auto es0 = recorded(markov_spectrum(pair.w0, inst.i_size + 1));
    const auto est = estimate_eps(pair.w0, es0, part, inst.i_size);
    const auto rep = theory_report(g, part, es0, est, inst.i_size);
    if (!(rep.a2_ok && rep.cond_i_ok && rep.cond_ii_ok)) continue;
    ++qualifying;
    const double margin = separation_margin(s_of(recorded(markov_spectrum(g, inst.i_size)), inst.i_size), part);
    worst_margin = std::min(worst_margin, margin);
    separated += margin > 0.0;
  }
  const bool pass = qualifying >= 20 && separated == qualifying;
  return {pass, fmt::format("{} candidates, {} satisfy all conditions, {} separated at t=1, smallest margin {:.4e}",
                            candidates, qualifying, separated, worst_margin)};
}

// 11. iterative vs dense oracle

Outcome oracle_equivalence() {
  Rng rng(11);
  double worst_lambda = 0.0, worst_s = 0.0;
  SpectrumOptions<double> krylov;
  krylov.method = SpectrumMethod::Krylov;
  for (int g_idx = 0; g_idx < 50; ++g_idx) {
    const auto g = random_instance(rng, 300, g_idx);
    const Index m = std::min<Index>(20, g.size() / 2);
    const auto it = recorded(markov_spectrum(g, m, krylov));
    const auto full = recorded(full_spectrum(g));
    worst_lambda = std::max(worst_lambda, (it.eigenvalues - full.eigenvalues.head(m)).cwiseAbs().maxCoeff());
    // S over every I inside the computed range that has a usable gap
    for (Index i = 1; i <= m; ++i) {
      if (i_eigen_gap(full, i) < 1e-6) continue;
      worst_s = std::max(worst_s, (s_of(it, i) - s_of(full, i)).cwiseAbs().maxCoeff());
    }
  }
  return {worst_lambda < 1e-8 && worst_s < 1e-6,
          fmt::format("50 graphs, max |dlambda| = {:.3e}, max |dS| = {:.3e}", worst_lambda, worst_s)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "toy sweep reproduction", toy_sweep},
      {2, "single-cluster separation", single_cluster},
      {3, "image experiment", image_experiment},
      {4, "full-sum identity", full_sum},
      {5, "D-orthonormality", d_orthonormality},
      {6, "rotation invariance", rotation},
      {7, "Hadamard verification", hadamard},
      {8, "drift bound", drift},
      {9, "gap preservation", gap_preservation},
      {10, "separation theorem end to end", separation_theorem},
      {11, "oracle equivalence", oracle_equivalence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failed += !out.pass;
    fmt::print("[PRIMARY] criterion {:>2} {:<32} {}  {}\n", c.id, c.name, out.pass ? "PASS" : "FAIL", out.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
