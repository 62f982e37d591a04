#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace looptau {

// Exact rationals. GMP keeps them reduced with positive denominator as long
// as values are built through make_rational / arithmetic, never through the
// raw two-argument mpq_class constructor (which skips canonicalization).
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// "num/den" with the sign on the numerator; denominator always present.
inline std::string rational_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational rational_pow(const Rational& base, unsigned long e) {
  Rational r = 1;
  Rational b = base;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline long factorial(int n) {
  long r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace looptau
