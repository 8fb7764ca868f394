#include "sen/norm.hpp"

#include "sen/errors.hpp"
#include "sen/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace sen {

namespace {

bool is_integer(double p) { return std::floor(p) == p; }

}  // namespace

WeightSpec WeightSpec::power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw Error(Errc::OutOfRange, "power weight needs p > 0");
  }
  return {Kind::Power, p};
}

WeightSpec WeightSpec::heat(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(Errc::OutOfRange, "heat weight needs s > 0");
  }
  return {Kind::Heat, s};
}

WeightSpec WeightSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (name == "constant" && colon == std::string::npos) return constant();
  if ((name == "power" || name == "heat") && colon != std::string::npos) {
    const std::string arg = text.substr(colon + 1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc() || end != arg.data() + arg.size()) {
      throw Error(Errc::Parse, "bad weight parameter '" + arg + "'");
    }
    return name == "power" ? power(value) : heat(value);
  }
  throw Error(Errc::Parse, "unknown weight '" + text + "' (constant | power:P | heat:S)");
}

double WeightSpec::operator()(double lambda) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Power:
      return is_integer(param) ? std::pow(lambda, param) : std::pow(std::max(lambda, 0.0), param);
    case Kind::Heat: return std::exp(-(1.0 - lambda) * param);
  }
  return 1.0;
}

double WeightSpec::derivative(double lambda) const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Power:
      if (is_integer(param)) return param * std::pow(lambda, param - 1.0);
      return lambda > 0.0 ? param * std::pow(lambda, param - 1.0) : 0.0;
    case Kind::Heat: return param * std::exp(-(1.0 - lambda) * param);
  }
  return 0.0;
}

std::string WeightSpec::to_string() const {
  switch (kind) {
    case Kind::Constant: return "constant";
    case Kind::Power: return "power:" + std::to_string(param);
    case Kind::Heat: return "heat:" + std::to_string(param);
  }
  return "constant";
}

template <typename Scalar>
NormResult<Scalar> embedding_norm(const EigenSystem<Scalar>& es, Index i_size,
                                  const WeightSpec& weight) {
  if (i_size < 1 || i_size > es.count()) {
    throw Error(Errc::OutOfRange, "|I| = " + std::to_string(i_size) + " outside 1.." +
                                      std::to_string(es.count()));
  }
  NormResult<Scalar> nr;
  nr.s = Vector<Scalar>::Zero(es.size());
  for (Index k = 0; k < i_size; ++k) {
    const Scalar f = Scalar(weight(double(es.eigenvalues(k))));
    nr.s += f * es.eigenvectors.col(k).cwiseAbs2();
  }
  nr.i_size = i_size;
  nr.weight = weight;
  return nr;
}

template <typename Scalar>
NormResult<Scalar> detect(NormResult<Scalar> nr, double quantile_q) {
  if (!(quantile_q > 0.0 && quantile_q < 1.0)) {
    throw Error(Errc::OutOfRange, "detection quantile must lie in (0, 1)");
  }
  const Scalar tau = empirical_quantile<Scalar>(nr.s, quantile_q);
  nr.threshold = tau;
  nr.predicted = (nr.s.array() > tau).eval();
  return nr;
}

template <typename Scalar>
std::vector<SweepRow> sweep_i(const EigenSystem<Scalar>& es, Index i_min, Index i_max,
                              const WeightSpec& weight, double quantile_q, const Mask& truth) {
  if (i_min < 1 || i_max > es.count() || i_min > i_max) {
    throw Error(Errc::OutOfRange, "sweep range " + std::to_string(i_min) + ".." +
                                      std::to_string(i_max) + " invalid for m = " +
                                      std::to_string(es.count()));
  }
  if (truth.size() != es.size()) {
    throw Error(Errc::SizeMismatch, "truth has " + std::to_string(truth.size()) +
                                        " entries, graph has " + std::to_string(es.size()));
  }
  std::vector<SweepRow> rows;
  rows.reserve(std::size_t(i_max - i_min + 1));
  // Accumulate in the same order as embedding_norm so results coincide.
  NormResult<Scalar> nr = embedding_norm(es, i_min, weight);
  for (Index i = i_min; i <= i_max; ++i) {
    if (i > i_min) {
      const Scalar f = Scalar(weight(double(es.eigenvalues(i - 1))));
      nr.s += f * es.eigenvectors.col(i - 1).cwiseAbs2();
      nr.i_size = i;
    }
    const NormResult<Scalar> det = detect(nr, quantile_q);
    const Metrics m = f1_score(*det.predicted, truth);
    rows.push_back({i, m.f1, m.precision, m.recall, m.degenerate});
  }
  return rows;
}

template <typename Scalar>
std::vector<Index> select_eigvecs(const EigenSystem<Scalar>& es, const NormResult<Scalar>& nr,
                                  Index count) {
  if (count < 1 || count > es.count()) {
    throw Error(Errc::OutOfRange, "count = " + std::to_string(count) + " outside 1.." +
                                      std::to_string(es.count()));
  }
  if (nr.s.size() != es.size()) {
    throw Error(Errc::SizeMismatch, "norm and eigensystem sizes differ");
  }
  Index x_max = 0;
  for (Index x = 1; x < nr.s.size(); ++x) {
    if (nr.s(x) > nr.s(x_max)) x_max = x;
  }
  std::vector<Index> order(std::size_t(es.count()));
  std::iota(order.begin(), order.end(), Index(0));
  const auto magnitude = [&](Index k) { return std::abs(es.eigenvectors(x_max, k)); };
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return magnitude(a) > magnitude(b); });
  order.resize(std::size_t(count));
  return order;
}

#define SEN_INSTANTIATE_NORM(Scalar)                                                          \
  template NormResult<Scalar> embedding_norm<Scalar>(const EigenSystem<Scalar>&, Index,       \
                                                     const WeightSpec&);                      \
  template NormResult<Scalar> detect<Scalar>(NormResult<Scalar>, double);                     \
  template std::vector<SweepRow> sweep_i<Scalar>(const EigenSystem<Scalar>&, Index, Index,    \
                                                 const WeightSpec&, double, const Mask&);     \
  template std::vector<Index> select_eigvecs<Scalar>(const EigenSystem<Scalar>&,              \
                                                     const NormResult<Scalar>&, Index);

SEN_INSTANTIATE_NORM(float)
SEN_INSTANTIATE_NORM(double)

}  // namespace sen
