#include "sen/diagnostics.hpp"

#include "sen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sen {

namespace {

struct Volumes {
  double background = 0.0;
  double cluster = 0.0;
  std::vector<double> per_cluster;  // entry j - 1
};

template <typename Scalar>
Volumes volumes(const Vector<Scalar>& degrees, const Partition& part) {
  Volumes v;
  v.per_cluster.assign(std::size_t(part.cluster_count()), 0.0);
  for (Index x = 0; x < part.size(); ++x) {
    const double d = double(degrees(x));
    const int j = part.label(x);
    if (j == Partition::kBackground) {
      v.background += d;
    } else {
      v.cluster += d;
      v.per_cluster[std::size_t(j - 1)] += d;
    }
  }
  return v;
}

void check_sizes(Index es_size, const Partition& part) {
  if (es_size != part.size()) {
    throw Error(Errc::SizeMismatch, "partition size " + std::to_string(part.size()) +
                                        " differs from eigensystem size " + std::to_string(es_size));
  }
}

// Sum of the cross-block entries of a perturbation, each pair counted once.
template <typename Scalar>
double cross_weight(const SparseMatrix<Scalar>& e, const Partition& part) {
  double total = 0.0;
  for (Index col = 0; col < e.outerSize(); ++col) {
    if (!part.in_cluster(col)) continue;
    for (typename SparseMatrix<Scalar>::InnerIterator it(e, col); it; ++it) {
      if (!part.in_cluster(it.row())) total += double(it.value());
    }
  }
  return total;
}

template <typename Scalar>
AffinityGraph<Scalar> graph_at(const DeformationPair<Scalar>& pair, double t) {
  SparseMatrix<Scalar> w = pair.w0.weights() + Scalar(t) * pair.e;
  return AffinityGraph<Scalar>::from_weights(std::move(w));
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

template <typename Scalar>
std::vector<Support> classify_initial_eigenvectors(const AffinityGraph<Scalar>& g0,
                                                   const EigenSystem<Scalar>& es0,
                                                   const Partition& part, Index i_size,
                                                   double mass_threshold) {
  check_sizes(es0.size(), part);
  if (i_size < 1 || i_size > es0.count()) {
    throw Error(Errc::OutOfRange, "|I| = " + std::to_string(i_size) + " outside 1.." +
                                      std::to_string(es0.count()));
  }
  const double cross = double(connection_strength(g0, part));
  if (cross > 1e-12) {
    throw Error(Errc::NotBlockDiagonal, "cross-block weight " + fmt_double(cross) + " at t = 0");
  }
  std::vector<Support> tags(std::size_t(i_size), Support::Background);
  for (Index k = 0; k < i_size; ++k) {
    double mass = 0.0;
    for (Index x = 0; x < es0.size(); ++x) {
      if (part.in_cluster(x)) {
        const double psi = double(es0.eigenvectors(x, k));
        mass += psi * psi * double(es0.degrees(x));
      }
    }
    if (mass > mass_threshold) tags[std::size_t(k)] = Support::Cluster;
  }
  return tags;
}

template <typename Scalar>
AssumptionEstimate estimate_eps(const AffinityGraph<Scalar>& g0, const EigenSystem<Scalar>& es0,
                                const Partition& part, Index i_size, double mass_threshold) {
  AssumptionEstimate est;
  est.classification = classify_initial_eigenvectors(g0, es0, part, i_size, mass_threshold);
  est.assigned_cluster.assign(std::size_t(i_size), 0);
  const Volumes vol = volumes(es0.degrees, part);
  const int K = part.cluster_count();
  std::vector<bool> taken(std::size_t(K), false);

  for (Index k = 0; k < i_size; ++k) {
    const auto psi2 = [&](Index x) {
      const double v = double(es0.eigenvectors(x, k));
      return v * v;
    };
    if (est.classification[std::size_t(k)] == Support::Background) {
      for (Index x = 0; x < es0.size(); ++x) {
        if (!part.in_cluster(x)) est.eps2 = std::max(est.eps2, psi2(x) * vol.background - 1.0);
      }
      continue;
    }
    ++est.k_in_i;
    std::vector<double> mass(std::size_t(K), 0.0);
    for (Index x = 0; x < es0.size(); ++x) {
      const int j = part.label(x);
      if (j != Partition::kBackground) mass[std::size_t(j - 1)] += psi2(x) * double(es0.degrees(x));
    }
    const int best = int(std::max_element(mass.begin(), mass.end()) - mass.begin()) + 1;
    est.assigned_cluster[std::size_t(k)] = best;
    if (taken[std::size_t(best - 1)]) est.assignment_ambiguous = true;
    taken[std::size_t(best - 1)] = true;
    const double nu_j = vol.per_cluster[std::size_t(best - 1)];
    for (Index x = 0; x < es0.size(); ++x) {
      const int j = part.label(x);
      if (j == best) {
        est.eps1 = std::max(est.eps1, std::abs(psi2(x) * nu_j - 1.0));
      } else if (j != Partition::kBackground) {
        est.eps1 = std::max(est.eps1, psi2(x) * vol.cluster);
      }
    }
  }
  return est;
}

template <typename Scalar>
TheoryReport theory_report(const AffinityGraph<Scalar>& graph, const Partition& part,
                           const EigenSystem<Scalar>& es0, const AssumptionEstimate& est,
                           Index i_size, double delta_cap) {
  check_sizes(es0.size(), part);
  if (graph.size() != part.size()) {
    throw Error(Errc::SizeMismatch, "partition size differs from graph size");
  }
  TheoryReport r;
  r.n = part.size();
  r.k_clusters = part.cluster_count();
  r.i_size = i_size;
  r.delta = part.delta();
  r.eps1 = est.eps1;
  r.eps2 = est.eps2;
  r.k_in_i = est.k_in_i;
  r.d_under = double(es0.degrees.minCoeff());
  r.d_over = double(es0.degrees.maxCoeff());
  r.c_strength = double(connection_strength(graph, part));
  r.delta0_gap = double(i_eigen_gap(es0, i_size));
  r.delta_cap = std::isnan(delta_cap) ? r.delta0_gap / 2.0 : delta_cap;

  const double n = double(r.n);
  const double K = double(r.k_clusters);
  const double delta = r.delta;
  const double du = r.d_under;
  const double dov = r.d_over;
  const double background_count = double(i_size) - K;
  const double cap = r.delta_cap;

  r.pound = du * (1.0 - r.eps1) / dov -
            delta / (1.0 - delta) * background_count / K * (1.0 + r.eps2);
  r.g0 = (K / delta) * r.pound / (n * du);
  r.s_upper0 = (K / delta) * (1.0 + 2.0 * r.eps1) / (n * du);
  r.a2_ok = r.pound > 0.0;
  r.a2_literal_ok = delta / (1.0 - delta) * background_count / K <
                    du * (1.0 - r.eps2) / (dov * (1.0 + r.eps1));
  r.cond_i_ok = r.delta0_gap >= 2.0 * cap;
  r.cond_ii_lhs = r.c_strength / du;
  r.cond_ii_rhs = cap / 8.0 / (1.0 + cap / 4.0) *
                  std::log(1.0 + 0.5 * r.pound / (1.0 + 2.0 * r.eps1));
  r.cond_ii_ok = r.cond_ii_lhs <= r.cond_ii_rhs;
  r.c_tilde = (1.0 + 4.0 / cap) * 2.0 * r.c_strength / du;

  const std::vector<Index> sizes = part.sub_cluster_sizes();
  double delta_min = 1.0;
  r.per_cluster_g.clear();
  for (const Index size : sizes) {
    const double dj = double(size) / n;
    delta_min = std::min(delta_min, dj);
    r.per_cluster_g.push_back(
        (du * (1.0 - r.eps1) / (dov * dj) - (1.0 + r.eps2) * background_count / (1.0 - delta)) /
        (n * du));
  }
  r.g_min0 = *std::min_element(r.per_cluster_g.begin(), r.per_cluster_g.end());
  r.s_bar0 = (r.eps1 / (delta / K) + (1.0 + r.eps1) / delta_min) / (n * du);
  r.eq20_ok = r.g_min0 >= 2.0 * (std::exp(r.c_tilde) - 1.0) * r.s_bar0;
  return r;
}

template <typename Scalar>
BoundCheck verify_prop31(const EigenSystem<Scalar>& es0, const Partition& part,
                         const TheoryReport& report, Index i_size) {
  check_sizes(es0.size(), part);
  BoundCheck check;
  const auto fail = [&](const std::string& what) {
    check.ok = false;
    if (check.violations.size() < 20) check.violations.push_back(what);
  };
  const Vector<Scalar> s = embedding_norm(es0, i_size).s;
  const double n = double(part.size());
  const double K = double(part.cluster_count());
  const double du = report.d_under;
  const double dov = report.d_over;
  const double e1 = report.eps1;
  const double e2 = report.eps2;
  const double slack = 1e-9;
  const std::vector<Index> sizes = part.sub_cluster_sizes();

  if (report.k_in_i != Index(part.cluster_count())) {
    fail("I holds " + std::to_string(report.k_in_i) + " cluster eigenvectors, expected " +
         std::to_string(part.cluster_count()));
  }
  const double b_upper =
      (1.0 + e2) * (double(i_size) - K) / ((1.0 - report.delta) * n * du);
  for (Index x = 0; x < part.size(); ++x) {
    const double v = double(s(x));
    const int j = part.label(x);
    if (j == Partition::kBackground) {
      if (v > b_upper * (1.0 + slack)) {
        fail("background node " + std::to_string(x) + ": S = " + fmt_double(v) + " > " +
             fmt_double(b_upper));
      }
    } else {
      const double dj = double(sizes[std::size_t(j - 1)]) / n;
      const double lower = (1.0 - e1) / (n * dov * dj);
      const double upper = (e1 / (report.delta / K) + (1.0 + e1) / dj) / (n * du);
      if (v < lower * (1.0 - slack)) {
        fail("cluster node " + std::to_string(x) + ": S = " + fmt_double(v) + " < " +
             fmt_double(lower));
      }
      if (v > upper * (1.0 + slack)) {
        fail("cluster node " + std::to_string(x) + ": S = " + fmt_double(v) + " > " +
             fmt_double(upper));
      }
    }
    if (v > report.s_bar0 * (1.0 + slack)) {
      fail("node " + std::to_string(x) + ": S = " + fmt_double(v) + " above sup bound " +
           fmt_double(report.s_bar0));
    }
  }
  if (!(report.g0 > 0.0)) {
    check.violations.push_back("no guaranteed separation: g0 = " + fmt_double(report.g0));
  }
  return check;
}

template <typename Scalar>
DynamicsTrace trace_dynamics(const DeformationPair<Scalar>& pair, const Partition& part,
                             Index t_steps, Index m, Index i_size,
                             const SpectrumOptions<Scalar>& options) {
  const Index n = pair.w0.size();
  check_sizes(n, part);
  if (t_steps < 2) throw Error(Errc::OutOfRange, "need at least two grid points");
  if (i_size < 1 || i_size >= n) {
    throw Error(Errc::OutOfRange, "|I| must satisfy 1 <= |I| < n");
  }
  const Index me = std::min(n, std::max(m, i_size + 1));

  DynamicsTrace tr;
  tr.t_grid.resize(t_steps);
  tr.eigenvalue_branches.resize(me, t_steps);
  tr.sorted_eigenvalues.resize(me, t_steps);
  tr.s_series.resize(n, t_steps);
  tr.gap_series.resize(t_steps);
  tr.c_strength = cross_weight(pair.e, part);
  tr.d_under = double(pair.w0.degrees().minCoeff());

  Matrix<Scalar> branch_vectors;
  for (Index step = 0; step < t_steps; ++step) {
    const double t = step == t_steps - 1 ? 1.0 : double(step) / double(t_steps - 1);
    tr.t_grid(step) = t;
    const AffinityGraph<Scalar> g = deform(pair, Scalar(t));
    const EigenSystem<Scalar> es = markov_spectrum(g, me, options);
    tr.sorted_eigenvalues.col(step) = es.eigenvalues.template cast<double>();
    tr.s_series.col(step) = embedding_norm(es, i_size).s.template cast<double>();

    std::vector<Index> match(static_cast<std::size_t>(me));
    if (step == 0) {
      for (Index b = 0; b < me; ++b) match[std::size_t(b)] = b;
      branch_vectors = es.eigenvectors;
    } else {
      const Matrix<double> overlap =
          (branch_vectors.transpose() * g.degrees().asDiagonal() * es.eigenvectors)
              .cwiseAbs()
              .template cast<double>();
      struct Entry {
        double value;
        Index branch;
        Index column;
      };
      std::vector<Entry> entries;
      entries.reserve(std::size_t(me * me));
      for (Index b = 0; b < me; ++b) {
        for (Index c = 0; c < me; ++c) entries.push_back({overlap(b, c), b, c});
      }
      std::stable_sort(entries.begin(), entries.end(),
                       [](const Entry& a, const Entry& b) { return a.value > b.value; });
      std::vector<bool> branch_done(std::size_t(me), false);
      std::vector<bool> column_done(std::size_t(me), false);
      for (const Entry& e : entries) {
        if (branch_done[std::size_t(e.branch)] || column_done[std::size_t(e.column)]) continue;
        branch_done[std::size_t(e.branch)] = true;
        column_done[std::size_t(e.column)] = true;
        match[std::size_t(e.branch)] = e.column;
        tr.min_overlap = std::min(tr.min_overlap, e.value);
      }
      for (Index b = 0; b < me; ++b) branch_vectors.col(b) = es.eigenvectors.col(match[std::size_t(b)]);
    }
    for (Index b = 0; b < me; ++b) {
      tr.eigenvalue_branches(b, step) = double(es.eigenvalues(match[std::size_t(b)]));
    }

    double gap = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < i_size; ++k) {
      for (Index j = i_size; j < me; ++j) {
        gap = std::min(gap, std::abs(tr.eigenvalue_branches(k, step) - tr.eigenvalue_branches(j, step)));
      }
    }
    tr.gap_series(step) = gap;

    const double bound = 4.0 * tr.c_strength * t / tr.d_under;
    for (Index k = 0; k < me; ++k) {
      const double drift = std::abs(tr.sorted_eigenvalues(k, step) - tr.sorted_eigenvalues(k, 0));
      if (drift > bound + 1e-12) tr.drift_ok = false;
      if (bound > 0.0) tr.max_drift_ratio = std::max(tr.max_drift_ratio, drift / bound);
    }
  }
  tr.delta0 = tr.gap_series(0);
  tr.gap_premise = tr.c_strength / tr.d_under <= tr.delta0 / 16.0;
  tr.gap_preserved = tr.gap_series.minCoeff() >= tr.delta0 / 2.0 - 1e-12;
  return tr;
}

template <typename Scalar>
Vector<double> s_evolution_rhs(const EigenSystem<Scalar>& es, const SparseMatrix<Scalar>& w_dot,
                               Index i_size, const WeightSpec& weight) {
  const Index n = es.size();
  const Index m = es.count();
  if (m != n) throw Error(Errc::OutOfRange, "the evolution equation needs the full spectrum");
  if (i_size < 1 || i_size > n) throw Error(Errc::OutOfRange, "|I| outside 1..n");
  const Matrix<double> psi = es.eigenvectors.template cast<double>();
  const Vector<double> lambda = es.eigenvalues.template cast<double>();
  const SparseMatrix<double> wd = w_dot.template cast<double>();
  const Vector<double> dd = degree_rate(wd);
  const Matrix<double> mw = psi.leftCols(i_size).transpose() * (wd * psi);
  const Matrix<double> md = psi.leftCols(i_size).transpose() * dd.asDiagonal() * psi;

  // S' = sum_{k in I, j} coeff(k, j) psi_k psi_j.
  Matrix<double> coeff(i_size, n);
  for (Index k = 0; k < i_size; ++k) {
    const double lk = lambda(k);
    const double fk = weight(lk);
    const double dfk = weight.derivative(lk);
    for (Index j = 0; j < n; ++j) {
      const double lj = lambda(j);
      if (j >= i_size) {
        coeff(k, j) = 2.0 * fk / (lk - lj) * (mw(k, j) - lk * md(k, j));
        continue;
      }
      const double gap = lk - lj;
      double a = dfk;
      double b = fk + lk * dfk;
      if (j != k && std::abs(gap) > 1e-10) {
        const double fj = weight(lj);
        a = (fk - fj) / gap;
        b = (lk * fk - lj * fj) / gap;
      }
      coeff(k, j) = a * mw(k, j) - b * md(k, j);
    }
  }
  const Matrix<double> mixed = psi * coeff.transpose();
  return psi.leftCols(i_size).cwiseProduct(mixed).rowwise().sum();
}

template <typename Scalar>
EvolutionCheck verify_s_evolution(const DeformationPair<Scalar>& pair, double t, Index i_size,
                                  double fd_step, const WeightSpec& weight) {
  if (!(fd_step > 0.0)) throw Error(Errc::OutOfRange, "finite-difference step must be positive");
  const AffinityGraph<Scalar> g = graph_at(pair, t);
  const EigenSystem<Scalar> es = full_spectrum(g);
  if (i_size < 1 || i_size >= es.count()) throw Error(Errc::OutOfRange, "|I| must be below n");

  const Vector<Scalar> rates =
      hadamard_rates(es, pair.e, degree_rate(pair.e), false).lambda_dot;
  const double motion = fd_step * double(rates.cwiseAbs().maxCoeff());
  const double gap = double(i_eigen_gap(es, i_size));
  if (!(gap > 10.0 * motion) || !(gap > 0.0)) {
    throw Error(Errc::GapTooSmall, "I-gap " + fmt_double(gap) + " against eigenvalue motion " +
                                       fmt_double(motion));
  }

  EvolutionCheck check;
  check.predicted = s_evolution_rhs(es, pair.e, i_size, weight);
  const Vector<Scalar> s_plus = embedding_norm(full_spectrum(graph_at(pair, t + fd_step)), i_size, weight).s;
  const Vector<Scalar> s_minus = embedding_norm(full_spectrum(graph_at(pair, t - fd_step)), i_size, weight).s;
  check.finite_difference = (s_plus - s_minus).template cast<double>() / (2.0 * fd_step);
  const double diff = (check.predicted - check.finite_difference).cwiseAbs().maxCoeff();
  const double scale = check.finite_difference.cwiseAbs().maxCoeff();
  check.max_rel_error = scale > 0.0 ? diff / scale : diff;
  return check;
}

#define SEN_INSTANTIATE_DIAGNOSTICS(Scalar)                                                     \
  template std::vector<Support> classify_initial_eigenvectors<Scalar>(                          \
      const AffinityGraph<Scalar>&, const EigenSystem<Scalar>&, const Partition&, Index, double); \
  template AssumptionEstimate estimate_eps<Scalar>(const AffinityGraph<Scalar>&,                \
                                                   const EigenSystem<Scalar>&, const Partition&, \
                                                   Index, double);                              \
  template TheoryReport theory_report<Scalar>(const AffinityGraph<Scalar>&, const Partition&,   \
                                              const EigenSystem<Scalar>&,                       \
                                              const AssumptionEstimate&, Index, double);        \
  template BoundCheck verify_prop31<Scalar>(const EigenSystem<Scalar>&, const Partition&,       \
                                            const TheoryReport&, Index);                        \
  template DynamicsTrace trace_dynamics<Scalar>(const DeformationPair<Scalar>&,                 \
                                                const Partition&, Index, Index, Index,          \
                                                const SpectrumOptions<Scalar>&);                \
  template Vector<double> s_evolution_rhs<Scalar>(const EigenSystem<Scalar>&,                   \
                                                  const SparseMatrix<Scalar>&, Index,           \
                                                  const WeightSpec&);                           \
  template EvolutionCheck verify_s_evolution<Scalar>(const DeformationPair<Scalar>&, double,    \
                                                     Index, double, const WeightSpec&);

SEN_INSTANTIATE_DIAGNOSTICS(float)
SEN_INSTANTIATE_DIAGNOSTICS(double)

}  // namespace sen
