#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "looptau/poly.hpp"

namespace looptau {

// Quotient of polynomials with the denominator held as a list of factors.
// No polynomial gcd is ever computed: cancellation is exact division of the
// numerator by individual denominator factors, plus stripping of shared
// monomial content. That is enough here because every denominator that
// arises downstream is a product of tau polynomials, so sums over a common
// lattice site keep their factors aligned instead of compounding.
// Equality is decided by cross-multiplication after dropping shared factors.
class RatFunc {
 public:
  RatFunc() = default;
  RatFunc(const Poly& p) : num_(p) {}
  RatFunc(const Rational& c) : num_(c) {}
  RatFunc(long c) : num_(c) {}
  RatFunc(Poly num, Poly den) : num_(std::move(num)) {
    if (den.is_zero()) throw std::domain_error("rational function with zero denominator");
    den_.push_back(std::move(den));
    normalize();
  }

  const Poly& num() const { return num_; }
  Poly den() const { return product(den_); }
  bool is_zero() const { return num_.is_zero(); }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) { return combined(a, b, +1); }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return combined(a, b, -1); }
  RatFunc operator-() const {
    RatFunc r = *this;
    r.num_ = -r.num_;
    return r;
  }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    RatFunc r;
    r.num_ = a.num_ * b.num_;
    r.den_ = a.den_;
    r.den_.insert(r.den_.end(), b.den_.begin(), b.den_.end());
    r.normalize();
    return r;
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.is_zero()) throw std::domain_error("division by zero rational function");
    RatFunc r;
    r.num_ = a.num_ * product(b.den_);
    r.den_ = a.den_;
    r.den_.push_back(b.num_);
    r.normalize();
    return r;
  }
  RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
  RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
  RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }

  RatFunc reciprocal() const {
    if (is_zero()) throw std::domain_error("reciprocal of zero rational function");
    RatFunc r;
    r.num_ = product(den_);
    r.den_.push_back(num_);
    r.normalize();
    return r;
  }

  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    std::vector<Poly> ae, be;
    split_extras(a.den_, b.den_, ae, be);
    return a.num_ * product(be) == b.num_ * product(ae);
  }

  Rational substitute(const std::map<VarId, Rational>& a) const {
    Rational d = 1;
    for (const Poly& f : den_) d *= f.substitute(a);
    if (d == 0) throw std::domain_error("rational function denominator vanishes at point");
    return num_.substitute(a) / d;
  }

  std::string str() const {
    if (den_.empty()) return num_.str();
    return "(" + num_.str() + ") / (" + den().str() + ")";
  }

 private:
  // Invariants kept by normalize(): zero numerator has no factors; factors
  // are non-constant, lex-lead monic, share no monomial with the numerator,
  // do not divide the numerator, and are sorted for multiset alignment.
  void normalize() {
    if (num_.is_zero()) {
      den_.clear();
      return;
    }
    std::vector<Poly> fs;
    fs.reserve(den_.size());
    Rational scale = 1;
    for (Poly& f : den_) {
      Monomial g = shrink(content(f), num_);
      if (!g.is_one()) {
        num_ = stripped(num_, g);
        f = stripped(f, g);
      }
      if (f.is_constant()) {
        scale *= f.constant_value();
        continue;
      }
      Rational lead = f.lex_lead()->second;
      if (lead != 1) {
        f = f.divided_by(lead);
        scale *= lead;
      }
      fs.push_back(std::move(f));
    }
    if (scale != 1) num_ = num_.divided_by(scale);
    for (bool changed = true; changed;) {
      changed = false;
      for (auto it = fs.begin(); it != fs.end();) {
        Poly q;
        if (num_.try_divided(*it, q)) {
          num_ = std::move(q);
          it = fs.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
    }
    std::sort(fs.begin(), fs.end(), poly_less);
    den_ = std::move(fs);
  }

  static RatFunc combined(const RatFunc& a, const RatFunc& b, int sgn) {
    std::vector<Poly> ae, be;
    split_extras(a.den_, b.den_, ae, be);
    RatFunc r;
    r.num_ = be.empty() ? a.num_ : a.num_ * product(be);
    Poly bn = ae.empty() ? b.num_ : b.num_ * product(ae);
    if (sgn > 0)
      r.num_ += bn;
    else
      r.num_ -= bn;
    r.den_ = a.den_;
    r.den_.insert(r.den_.end(), be.begin(), be.end());
    r.normalize();
    return r;
  }

  static bool poly_less(const Poly& a, const Poly& b) { return a.terms() < b.terms(); }

  // Factors in a but not b land in ae and vice versa; shared ones are dropped.
  static void split_extras(const std::vector<Poly>& a, const std::vector<Poly>& b,
                           std::vector<Poly>& ae, std::vector<Poly>& be) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (poly_less(a[i], b[j]))
        ae.push_back(a[i++]);
      else if (poly_less(b[j], a[i]))
        be.push_back(b[j++]);
      else {
        ++i;
        ++j;
      }
    }
    for (; i < a.size(); ++i) ae.push_back(a[i]);
    for (; j < b.size(); ++j) be.push_back(b[j]);
  }

  static Poly product(const std::vector<Poly>& fs) {
    Poly p(1);
    for (const Poly& f : fs) p = p * f;
    return p;
  }

  // Largest monomial dividing every term of p (p nonzero).
  static Monomial content(const Poly& p) { return shrink(p.terms().begin()->first, p); }

  static Monomial shrink(Monomial g, const Poly& p) {
    for (const auto& [m, c] : p.terms()) {
      if (g.is_one()) break;
      Monomial next;
      for (const auto& [v, e] : g.factors()) {
        int k = std::min(e, m.exponent(v));
        if (k > 0) next = next * Monomial::var(v, k);
      }
      g = next;
    }
    return g;
  }

  static Poly stripped(const Poly& p, const Monomial& g) {
    Poly r;
    for (const auto& [m, c] : p.terms()) r.add_term(g.divide_from(m), c);
    return r;
  }

  Poly num_;
  std::vector<Poly> den_;
};

}  // namespace looptau
