#pragma once

#include "sen/types.hpp"

namespace sen {

/// Confusion counts and derived scores of a binary detection.
struct Metrics {
  Index tp = 0;
  Index fp = 0;
  Index fn = 0;
  Index tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // precision + recall == 0, so F1 is undefined and reported as 0.
  bool degenerate = false;
};

/// Precision, recall and F1 of `predicted` against `truth` (true = positive).
/// Throws SizeMismatch when the lengths differ.
Metrics f1_score(const Mask& predicted, const Mask& truth);

/// Empirical q-quantile with linear interpolation between order statistics
/// (type 7): q = 0 gives the minimum and q = 1 the maximum.
/// Throws Empty for an empty input and OutOfRange for q outside [0, 1].
template <typename Scalar>
Scalar empirical_quantile(const Eigen::Ref<const Vector<Scalar>>& values, double q);

}  // namespace sen
