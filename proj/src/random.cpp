#include "sen/random.hpp"

#include <cmath>
#include <numbers>

namespace sen {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  return double(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  while (u == 0.0) u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double a = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Index Rng::below(Index bound) {
  // Rejection keeps the draw unbiased.
  const std::uint64_t b = std::uint64_t(bound);
  const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % b);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return Index(x % b);
}

}  // namespace sen
