#include "sen/eval.hpp"

#include "sen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sen {

Metrics f1_score(const Mask& predicted, const Mask& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(Errc::SizeMismatch, "predicted has " + std::to_string(predicted.size()) +
                                        " entries, truth has " + std::to_string(truth.size()));
  }
  Metrics m;
  for (Index i = 0; i < truth.size(); ++i) {
    if (predicted(i)) {
      truth(i) ? ++m.tp : ++m.fp;
    } else {
      truth(i) ? ++m.fn : ++m.tn;
    }
  }
  const Index predicted_pos = m.tp + m.fp;
  const Index actual_pos = m.tp + m.fn;
  m.precision = predicted_pos > 0 ? double(m.tp) / double(predicted_pos) : 0.0;
  m.recall = actual_pos > 0 ? double(m.tp) / double(actual_pos) : 0.0;
  const double sum = m.precision + m.recall;
  m.degenerate = !(sum > 0.0);
  m.f1 = m.degenerate ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

template <typename Scalar>
Scalar empirical_quantile(const Eigen::Ref<const Vector<Scalar>>& values, double q) {
  if (values.size() == 0) {
    throw Error(Errc::Empty, "quantile of an empty vector");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(Errc::OutOfRange, "quantile level must lie in [0, 1]");
  }
  std::vector<Scalar> sorted(values.data(), values.data() + values.size());
  const double h = double(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  // Only the two bracketing order statistics are needed.
  std::nth_element(sorted.begin(), sorted.begin() + lo, sorted.end());
  const Scalar x_lo = sorted[lo];
  Scalar x_hi = x_lo;
  if (hi != lo) {
    x_hi = *std::min_element(sorted.begin() + lo + 1, sorted.end());
  }
  return x_lo + Scalar(h - double(lo)) * (x_hi - x_lo);
}

template float empirical_quantile<float>(const Eigen::Ref<const Vector<float>>&, double);
template double empirical_quantile<double>(const Eigen::Ref<const Vector<double>>&, double);

}  // namespace sen
