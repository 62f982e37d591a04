#pragma once

#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "looptau/poly.hpp"
#include "looptau/ratfunc.hpp"

namespace looptau {

template <typename R>
struct RingTraits;

template <>
struct RingTraits<Rational> {
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static bool is_zero(const Rational& r) { return r == 0; }
  static std::optional<Rational> try_invert(const Rational& r) {
    if (r == 0) return std::nullopt;
    return Rational(1) / r;
  }
  static std::string str(const Rational& r) { return rational_string(r); }
};

template <>
struct RingTraits<Poly> {
  static Poly zero() { return Poly(); }
  static Poly one() { return Poly(1); }
  static bool is_zero(const Poly& p) { return p.is_zero(); }
  // Only nonzero rational constants are units among polynomials.
  static std::optional<Poly> try_invert(const Poly& p) {
    if (!p.is_constant() || p.is_zero()) return std::nullopt;
    return Poly(Rational(1) / p.constant_value());
  }
  static std::string str(const Poly& p) { return p.str(); }
};

template <>
struct RingTraits<RatFunc> {
  static RatFunc zero() { return RatFunc(); }
  static RatFunc one() { return RatFunc(1); }
  static bool is_zero(const RatFunc& f) { return f.is_zero(); }
  static std::optional<RatFunc> try_invert(const RatFunc& f) {
    if (f.is_zero()) return std::nullopt;
    return f.reciprocal();
  }
  static std::string str(const RatFunc& f) { return f.str(); }
};

// Truncated Laurent series in z over a coefficient ring R.
//
// trunc() == N means: every coefficient of z^m with m >= -N is stored exactly;
// coefficients below z^-N are unknown. trunc() == EXACT means the series is a
// finite Laurent polynomial with all coefficients known. Arithmetic carries
// the truncation along, so a coefficient can be read back only where it is
// actually determined by the inputs.
template <typename R>
class Series {
 public:
  static constexpr int EXACT = std::numeric_limits<int>::max() / 4;

  Series() : trunc_(EXACT) {}
  explicit Series(const R& c, int exponent = 0) : trunc_(EXACT) {
    if (!RingTraits<R>::is_zero(c)) coeffs_[exponent] = c;
  }

  static Series z_pow(int exponent) { return Series(RingTraits<R>::one(), exponent); }

  static Series with_trunc(int trunc) {
    Series s;
    s.trunc_ = trunc;
    return s;
  }

  int trunc() const { return trunc_; }
  bool is_exact() const { return trunc_ == EXACT; }

  // All stored coefficients vanish; for is_exact() this means the zero series.
  bool known_part_zero() const { return coeffs_.empty(); }

  bool is_exact_zero() const { return is_exact() && coeffs_.empty(); }

  void set_coeff(int exponent, const R& c) {
    if (trunc_ != EXACT && exponent < -trunc_) return;
    if (RingTraits<R>::is_zero(c))
      coeffs_.erase(exponent);
    else
      coeffs_[exponent] = c;
  }

  const R& coeff(int exponent) const {
    if (trunc_ != EXACT && exponent < -trunc_)
      throw std::out_of_range("series coefficient below truncation");
    auto it = coeffs_.find(exponent);
    if (it == coeffs_.end()) {
      static const R zero = RingTraits<R>::zero();
      return zero;
    }
    return it->second;
  }

  // Largest exponent with nonzero stored coefficient.
  std::optional<int> max_exponent() const {
    if (coeffs_.empty()) return std::nullopt;
    return coeffs_.rbegin()->first;
  }

  std::optional<int> min_known_exponent() const {
    if (coeffs_.empty()) return std::nullopt;
    return coeffs_.begin()->first;
  }

  const std::map<int, R>& terms() const { return coeffs_; }

  Series operator-() const {
    Series out = *this;
    for (auto& [e, c] : out.coeffs_) c = RingTraits<R>::zero() - c;
    return out;
  }

  Series& operator+=(const Series& o) {
    trunc_ = std::min(trunc_, o.trunc_);
    for (const auto& [e, c] : o.coeffs_) {
      auto it = coeffs_.find(e);
      if (it == coeffs_.end())
        coeffs_[e] = c;
      else {
        it->second = it->second + c;
        if (RingTraits<R>::is_zero(it->second)) coeffs_.erase(it);
      }
    }
    drop_below_cutoff();
    return *this;
  }

  Series& operator-=(const Series& o) { return *this += -o; }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }

  friend Series operator*(const Series& a, const Series& b) {
    Series out;
    out.trunc_ = mul_trunc(a, b);
    if (a.coeffs_.empty() || b.coeffs_.empty()) {
      if (a.is_exact_zero() || b.is_exact_zero()) out.trunc_ = EXACT;
      return out;
    }
    for (const auto& [ea, ca] : a.coeffs_)
      for (const auto& [eb, cb] : b.coeffs_) {
        int e = ea + eb;
        if (out.trunc_ != EXACT && e < -out.trunc_) continue;
        R prod = ca * cb;
        if (RingTraits<R>::is_zero(prod)) continue;
        auto it = out.coeffs_.find(e);
        if (it == out.coeffs_.end())
          out.coeffs_[e] = prod;
        else {
          it->second = it->second + prod;
          if (RingTraits<R>::is_zero(it->second)) out.coeffs_.erase(it);
        }
      }
    return out;
  }

  Series& operator*=(const Series& o) { return *this = *this * o; }

  Series scaled(const R& c) const {
    Series out;
    out.trunc_ = trunc_;
    if (RingTraits<R>::is_zero(c)) return out;
    for (const auto& [e, v] : coeffs_) {
      R prod = v * c;
      if (!RingTraits<R>::is_zero(prod)) out.coeffs_[e] = prod;
    }
    return out;
  }

  // Multiply by z^k.
  Series shifted(int k) const {
    Series out;
    out.trunc_ = trunc_ == EXACT ? EXACT : trunc_ - k;
    for (const auto& [e, c] : coeffs_) out.coeffs_[e + k] = c;
    return out;
  }

  // Forget everything below z^-n.
  Series truncated(int n) const {
    Series out = *this;
    out.trunc_ = std::min(trunc_, n);
    out.drop_below_cutoff();
    return out;
  }

  // Multiplicative inverse, correct at least down to z^-n. The top term
  // u*z^m must have u a unit in R; the rest is summed as a geometric series.
  Series inverted(int n) const {
    auto top = max_exponent();
    if (!top) throw std::domain_error("series not invertible at this truncation");
    int m = *top;
    auto u_inv = RingTraits<R>::try_invert(coeffs_.rbegin()->second);
    if (!u_inv) throw std::domain_error("series not invertible at this truncation");
    // t = a * u^-1 * z^-m - 1 has only negative exponents.
    Series t = this->scaled(*u_inv).shifted(-m);
    t -= Series(RingTraits<R>::one());
    if (auto te = t.max_exponent(); te && *te >= 0)
      throw std::logic_error("series inversion: unexpected nonnegative remainder");
    Series sum(RingTraits<R>::one());
    if (!t.is_exact_zero()) {
      // Geometric series: terms beyond j affect only exponents below -j, so
      // after the z^-m shift everything below z^-n comes from j > n - m.
      Series power(RingTraits<R>::one());
      int jmax = std::max(0, n - m);
      for (int j = 1; j <= jmax; ++j) {
        power *= -t;
        sum += power;
      }
      sum.trunc_ = std::min(sum.trunc_, jmax);
      sum.drop_below_cutoff();
    }
    Series out = sum.scaled(*u_inv).shifted(-m);
    if (out.trunc_ < n)
      throw std::domain_error("series not invertible at this truncation");
    return out;
  }

  // Exact equality of stored data (same truncation, same coefficients).
  friend bool operator==(const Series& a, const Series& b) {
    return a.trunc_ == b.trunc_ && a.coeffs_ == b.coeffs_;
  }

  // Both series determined down to z^-n and agreeing there.
  friend bool equal_down_to(const Series& a, const Series& b, int n) {
    if (a.trunc_ < n || b.trunc_ < n) return false;
    Series d = a - b;
    for (const auto& [e, c] : d.coeffs_)
      if (e >= -n && !RingTraits<R>::is_zero(c)) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    if (coeffs_.empty()) os << "0";
    bool first = true;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      if (!first) os << " + ";
      first = false;
      os << "(" << RingTraits<R>::str(it->second) << ")";
      if (it->first != 0) os << "*z^" << it->first;
    }
    if (trunc_ != EXACT) os << " + O(z^" << -(trunc_ + 1) << ")";
    return os.str();
  }

 private:
  void drop_below_cutoff() {
    if (trunc_ == EXACT) return;
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (it->first < -trunc_)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  static int mul_trunc(const Series& a, const Series& b) {
    if (a.trunc_ == EXACT && b.trunc_ == EXACT) return EXACT;
    // The exponent below which unknown tails can pollute the product.
    long na = a.trunc_, nb = b.trunc_;
    long ma = a.coeffs_.empty() ? -na - 1 : a.coeffs_.rbegin()->first;
    long mb = b.coeffs_.empty() ? -nb - 1 : b.coeffs_.rbegin()->first;
    long t = std::min({na - mb, nb - ma, na + nb + 1});
    if (t >= EXACT) return EXACT;
    return static_cast<int>(t);
  }

  std::map<int, R> coeffs_;
  int trunc_;
};

using QSeries = Series<Rational>;
using PSeries = Series<Poly>;
using FSeries = Series<RatFunc>;

}  // namespace looptau
