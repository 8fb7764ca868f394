#pragma once

#include "sen/spectral.hpp"
#include "sen/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sen {

/// Spectral weight f(lambda) applied to each eigenvector in the norm.
struct WeightSpec {
  enum class Kind { Constant, Power, Heat };

  Kind kind = Kind::Constant;
  double param = 0.0;  // p for Power, s for Heat

  static WeightSpec constant() { return {}; }
  // Throws OutOfRange unless p > 0.
  static WeightSpec power(double p);
  // Throws OutOfRange unless s > 0.
  static WeightSpec heat(double s);
  // "constant", "power:2", "heat:0.5".
  static WeightSpec parse(const std::string& text);

  // Constant 1, Power lambda^p (max(lambda, 0)^p for non-integer p),
  // Heat exp(-(1 - lambda) s).
  double operator()(double lambda) const;
  double derivative(double lambda) const;
  std::string to_string() const;
};

template <typename Scalar>
struct NormResult {
  Vector<Scalar> s;
  Index i_size = 0;
  WeightSpec weight;
  std::optional<Scalar> threshold;
  std::optional<Mask> predicted;
};

/// S(x) = sum_{k < i_size} f(lambda_k) psi_k(x)^2. Throws OutOfRange unless
/// 1 <= i_size <= m.
template <typename Scalar>
NormResult<Scalar> embedding_norm(const EigenSystem<Scalar>& es, Index i_size,
                                  const WeightSpec& weight = {});

/// tau = q-quantile of S; predicted(x) = S(x) > tau.
template <typename Scalar>
NormResult<Scalar> detect(NormResult<Scalar> nr, double quantile_q);

struct SweepRow {
  Index i_size = 0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool degenerate = false;
};

/// detect + F1 for every i_size in [i_min, i_max].
template <typename Scalar>
std::vector<SweepRow> sweep_i(const EigenSystem<Scalar>& es, Index i_min, Index i_max,
                              const WeightSpec& weight, double quantile_q, const Mask& truth);

/// Indices k (0-based) of the `count` eigenvectors with the largest
/// |psi_k(x_max)| where x_max maximizes S (lowest index on ties), ordered
/// by decreasing magnitude.
template <typename Scalar>
std::vector<Index> select_eigvecs(const EigenSystem<Scalar>& es, const NormResult<Scalar>& nr,
                                  Index count);

}  // namespace sen
