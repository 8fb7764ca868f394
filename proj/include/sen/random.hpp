#pragma once

#include "sen/types.hpp"

#include <cstdint>
#include <random>

namespace sen {

/// Deterministic random source: 64-bit Mersenne twister with explicit
/// conversions, so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Seeds trial `stream` of a run with master seed `seed`.
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();  // [0, 1)
  double normal();
  Index below(Index bound);  // uniform on 0..bound-1

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sen
