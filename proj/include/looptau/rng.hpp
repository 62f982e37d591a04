#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "looptau/rational.hpp"

namespace looptau {

// Deterministic random source. mt19937_64 output is fully specified by the
// standard; the range mapping below is hand-rolled so that streams are
// reproducible across platforms and library versions (std::uniform_int_distribution
// is not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform on [lo, hi], inclusive, via rejection sampling.
  int uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int bounds out of order");
    uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
    uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return static_cast<int>(lo + static_cast<int64_t>(x % span));
  }

  // Nonzero numerator in [-max_num, max_num], denominator in [1, max_den].
  Rational nonzero_rational(int max_num, int max_den) {
    int num = 0;
    while (num == 0) num = uniform_int(-max_num, max_num);
    return make_rational(num, uniform_int(1, max_den));
  }

  Rational rational(int max_num, int max_den) {
    return make_rational(uniform_int(-max_num, max_num), uniform_int(1, max_den));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace looptau
