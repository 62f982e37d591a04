#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "looptau/rational.hpp"

namespace looptau {

// Indexed variable such as c[-3] or e[2]. The coordinate ring uses the
// families c, d, e; the identity suites also use free symbol families
// (w, x, y, z) for expansion variables.
struct VarId {
  char family;
  int index;

  friend auto operator<=>(const VarId&, const VarId&) = default;
};

inline std::string var_string(const VarId& v) {
  return std::string(1, v.family) + "[" + std::to_string(v.index) + "]";
}

// Product of variables with positive exponents, kept sorted by VarId.
class Monomial {
 public:
  using Factors = std::vector<std::pair<VarId, int>>;

  Monomial() = default;

  static Monomial var(VarId v, int exp = 1) {
    if (exp <= 0) throw std::invalid_argument("monomial exponent must be positive");
    Monomial m;
    m.f_.emplace_back(v, exp);
    return m;
  }

  const Factors& factors() const { return f_; }
  bool is_one() const { return f_.empty(); }

  int exponent(VarId v) const {
    for (const auto& [w, e] : f_)
      if (w == v) return e;
    return 0;
  }

  int degree() const {
    int d = 0;
    for (const auto& [v, e] : f_) d += e;
    return d;
  }

  int degree_in_family(char fam) const {
    int d = 0;
    for (const auto& [v, e] : f_)
      if (v.family == fam) d += e;
    return d;
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    r.f_.reserve(f_.size() + o.f_.size());
    auto a = f_.begin();
    auto b = o.f_.begin();
    while (a != f_.end() && b != o.f_.end()) {
      if (a->first < b->first)
        r.f_.push_back(*a++);
      else if (b->first < a->first)
        r.f_.push_back(*b++);
      else {
        r.f_.emplace_back(a->first, a->second + b->second);
        ++a;
        ++b;
      }
    }
    r.f_.insert(r.f_.end(), a, f_.end());
    r.f_.insert(r.f_.end(), b, o.f_.end());
    return r;
  }

  bool divides(const Monomial& o) const {
    auto a = f_.begin();
    auto b = o.f_.begin();
    while (a != f_.end()) {
      while (b != o.f_.end() && b->first < a->first) ++b;
      if (b == o.f_.end() || !(b->first == a->first) || b->second < a->second) return false;
      ++a;
    }
    return true;
  }

  // Quotient o / this; requires divides(o).
  Monomial divide_from(const Monomial& o) const {
    Monomial r;
    auto a = f_.begin();
    for (auto b = o.f_.begin(); b != o.f_.end(); ++b) {
      if (a != f_.end() && a->first == b->first) {
        int e = b->second - a->second;
        if (e < 0) throw std::invalid_argument("monomial division underflow");
        if (e > 0) r.f_.emplace_back(b->first, e);
        ++a;
      } else {
        r.f_.push_back(*b);
      }
    }
    if (a != f_.end()) throw std::invalid_argument("monomial does not divide");
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.f_ == b.f_; }

  // Serialization order: lexicographic on the factor triples
  // (family, index, exponent); shared prefixes put the shorter monomial first.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    return std::lexicographical_compare(
        a.f_.begin(), a.f_.end(), b.f_.begin(), b.f_.end(), [](const auto& x, const auto& y) {
          if (x.first != y.first) return x.first < y.first;
          return x.second < y.second;
        });
  }

  // Classical lex term order on exponent vectors (variables significant in
  // VarId order). Multiplicative, hence usable for exact division.
  static bool lex_term_less(const Monomial& a, const Monomial& b) {
    auto x = a.f_.begin();
    auto y = b.f_.begin();
    while (x != a.f_.end() || y != b.f_.end()) {
      if (x == a.f_.end()) return true;   // a has exponent 0 at y's variable
      if (y == b.f_.end()) return false;  // b has exponent 0 at x's variable
      if (x->first < y->first) return false;
      if (y->first < x->first) return true;
      if (x->second != y->second) return x->second < y->second;
      ++x;
      ++y;
    }
    return false;
  }

  std::string str() const {
    std::string s;
    for (const auto& [v, e] : f_) {
      if (!s.empty()) s += "*";
      s += var_string(v);
      if (e > 1) s += "^" + std::to_string(e);
    }
    return s;
  }

 private:
  Factors f_;  // sorted by VarId, exponents > 0
};

// Sparse multivariate polynomial over Q in canonical form: no zero
// coefficients, terms keyed by Monomial in serialization order.
class Poly {
 public:
  using Terms = std::map<Monomial, Rational>;

  Poly() = default;
  Poly(const Rational& c) {
    if (c != 0) t_[Monomial()] = c;
  }
  Poly(long c) : Poly(Rational(c)) {}

  static Poly var(VarId v, int exp = 1) { return from_term(Monomial::var(v, exp), 1); }
  static Poly var(char family, int index, int exp = 1) {
    return var(VarId{family, index}, exp);
  }
  static Poly from_term(const Monomial& m, const Rational& c) {
    Poly p;
    if (c != 0) p.t_[m] = c;
    return p;
  }

  const Terms& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  size_t term_count() const { return t_.size(); }

  bool is_constant() const {
    return t_.empty() || (t_.size() == 1 && t_.begin()->first.is_one());
  }
  Rational constant_value() const {
    if (t_.empty()) return 0;
    if (!is_constant()) throw std::logic_error("poly is not constant");
    return t_.begin()->second;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = t_.find(m);
    if (it == t_.end()) {
      t_.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == 0) t_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [m, c] : o.t_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [m, c] : o.t_) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  Poly operator-() const {
    Poly r;
    for (const auto& [m, c] : t_) r.t_[m] = -c;
    return r;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.t_)
      for (const auto& [mb, cb] : b.t_) r.add_term(ma * mb, ca * cb);
    return r;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  Poly& scale(const Rational& c) {
    if (c == 0) {
      t_.clear();
      return *this;
    }
    for (auto& [m, v] : t_) v *= c;
    return *this;
  }
  friend Poly operator*(Poly a, const Rational& c) { return a.scale(c); }
  friend Poly operator*(const Rational& c, Poly a) { return a.scale(c); }

  // Exact division by a nonzero rational (always exact over Q).
  Poly divided_by(const Rational& c) const {
    if (c == 0) throw std::invalid_argument("division by zero rational");
    Poly r = *this;
    for (auto& [m, v] : r.t_) v /= c;
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.t_ == b.t_; }

  // Largest term under the lex term order (for exact polynomial division).
  Terms::const_iterator lex_lead() const {
    if (t_.empty()) throw std::logic_error("lead term of zero polynomial");
    auto best = t_.begin();
    for (auto it = std::next(t_.begin()); it != t_.end(); ++it)
      if (Monomial::lex_term_less(best->first, it->first)) best = it;
    return best;
  }

  // Division probe: sets q = *this / d and returns true when d divides
  // exactly; returns false otherwise (q is then meaningless).
  bool try_divided(const Poly& d, Poly& q) const {
    if (d.is_zero()) return false;
    if (d.is_constant()) {
      q = divided_by(d.constant_value());
      return true;
    }
    q = Poly();
    if (is_zero()) return true;
    Poly r = *this;
    auto dl = d.lex_lead();
    while (!r.is_zero()) {
      auto rl = r.lex_lead();
      if (!dl->first.divides(rl->first)) return false;
      Monomial qm = dl->first.divide_from(rl->first);
      Rational qc = rl->second / dl->second;
      Poly t = from_term(qm, qc);
      q += t;
      r -= t * d;
    }
    return true;
  }

  // Exact division: returns *this / d, throwing if d does not divide exactly.
  Poly divided_exact(const Poly& d) const {
    if (d.is_zero()) throw std::invalid_argument("division by zero polynomial");
    Poly q;
    if (!try_divided(d, q)) throw std::domain_error("polynomial division is not exact");
    return q;
  }

  std::set<VarId> variables() const {
    std::set<VarId> s;
    for (const auto& [m, c] : t_)
      for (const auto& [v, e] : m.factors()) s.insert(v);
    return s;
  }

  int degree_in_family(char fam) const {
    int d = 0;
    for (const auto& [m, c] : t_) d = std::max(d, m.degree_in_family(fam));
    return d;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& [m, c] : t_) d = std::max(d, m.degree());
    return d;
  }

  // Exact evaluation; every variable of the polynomial must be assigned.
  Rational substitute(const std::map<VarId, Rational>& a) const {
    Rational sum = 0;
    for (const auto& [m, c] : t_) {
      Rational term = c;
      for (const auto& [v, e] : m.factors()) {
        auto it = a.find(v);
        if (it == a.end())
          throw std::out_of_range("substitute: missing variable " + var_string(v));
        term *= rational_pow(it->second, static_cast<unsigned long>(e));
      }
      sum += term;
    }
    return sum;
  }

  // Canonical text form: terms in serialization order, each as
  // "+num/den" or "-num/den" followed by its "*fam[idx]^exp" factors.
  std::string str() const {
    if (t_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : t_) {
      if (!s.empty()) s += " ";
      s += (c < 0 ? "-" : "+");
      Rational ac = abs(c);
      s += rational_string(ac);
      if (!m.is_one()) s += "*" + m.str();
    }
    return s;
  }

 private:
  Terms t_;
};

inline Poly pow(const Poly& p, int e) {
  if (e < 0) throw std::invalid_argument("negative polynomial power");
  Poly r = Poly(1);
  Poly b = p;
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

}  // namespace looptau
