#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "looptau/det.hpp"
#include "looptau/matrix.hpp"
#include "looptau/poly.hpp"
#include "looptau/ratfunc.hpp"
#include "looptau/rational.hpp"
#include "looptau/report.hpp"
#include "looptau/rng.hpp"
#include "looptau/series.hpp"
#include "looptau/window.hpp"

// Semi-infinite wedge model used as an independent oracle. States are
// explicit particle/hole configurations, operators act by transposition
// counting, and every tau function or Birkhoff entry recomputed here goes
// through nothing but these elementary moves. None of the generating-function
// machinery from the rest of the library is assumed.
namespace looptau::fock {

// Hard bound on excitations per component; exceeding it is an error, never a
// silent truncation.
inline constexpr int kExcitationCap = 8;

// One fermion component relative to the charge-zero vacuum: occupied levels
// below zero and vacated levels at or above zero, both sorted increasing.
struct ComponentState {
  std::vector<int> particles;
  std::vector<int> holes;

  friend auto operator<=>(const ComponentState&, const ComponentState&) = default;
};

struct WedgeState {
  std::vector<ComponentState> comp;

  int components() const { return static_cast<int>(comp.size()); }

  int charge(int a) const {
    return static_cast<int>(comp[a].particles.size()) - static_cast<int>(comp[a].holes.size());
  }

  int excitations(int a) const {
    return static_cast<int>(comp[a].particles.size() + comp[a].holes.size());
  }

  static WedgeState vacuum(int n) {
    if (n < 1) throw std::invalid_argument("wedge space needs at least one component");
    WedgeState s;
    s.comp.resize(n);
    return s;
  }

  friend auto operator<=>(const WedgeState&, const WedgeState&) = default;

  std::string str() const {
    std::string s;
    for (int a = components() - 1; a >= 0; --a) {
      s += std::to_string(a) + ":(";
      for (size_t i = 0; i < comp[a].particles.size(); ++i)
        s += (i ? "," : "") + std::to_string(comp[a].particles[i]);
      s += "|";
      for (size_t i = 0; i < comp[a].holes.size(); ++i)
        s += (i ? "," : "") + std::to_string(comp[a].holes[i]);
      s += ")";
      if (a > 0) s += " ";
    }
    return s;
  }
};

namespace detail {

inline bool sorted_contains(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

inline int count_below(const std::vector<int>& v, int x) {
  return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
}

inline int count_above(const std::vector<int>& v, int x) {
  return static_cast<int>(v.end() - std::upper_bound(v.begin(), v.end(), x));
}

inline void sorted_insert(std::vector<int>& v, int x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}

inline void sorted_erase(std::vector<int>& v, int x) {
  v.erase(std::lower_bound(v.begin(), v.end(), x));
}

// Operators standing left of component a's block in the canonical monomial:
// the canonical order lists components in descending order, so that is every
// excitation of a higher component.
inline int ops_left_of(const WedgeState& s, int a) {
  int c = 0;
  for (int b = a + 1; b < s.components(); ++b) c += s.excitations(b);
  return c;
}

}  // namespace detail

struct PsiResult {
  WedgeState state;
  int sign;
};

// Mode operator of component a: dir +1 wedges the basis vector at level
// `mode`, dir -1 contracts against the level -mode-1. Within a component the
// canonical monomial lists creation modes increasing, then annihilation modes
// increasing; the sign is the number of operators the new factor crosses to
// reach its slot. Returns nothing when the action vanishes.
inline std::optional<PsiResult> psi_apply(const WedgeState& s, int a, int dir, int mode) {
  if (a < 0 || a >= s.components()) throw std::invalid_argument("component out of range");
  WedgeState out = s;
  ComponentState& c = out.comp[a];
  int cross = detail::ops_left_of(s, a);
  if (dir > 0) {
    if (mode < 0) {
      if (detail::sorted_contains(c.particles, mode)) return std::nullopt;
      if (s.excitations(a) + 1 > kExcitationCap)
        throw std::domain_error("state exceeds the excitation cap");
      cross += detail::count_below(c.particles, mode);
      detail::sorted_insert(c.particles, mode);
    } else {
      if (!detail::sorted_contains(c.holes, mode)) return std::nullopt;
      cross += static_cast<int>(c.particles.size()) + detail::count_above(c.holes, mode);
      detail::sorted_erase(c.holes, mode);
    }
  } else {
    int level = -mode - 1;
    if (level >= 0) {
      if (detail::sorted_contains(c.holes, level)) return std::nullopt;
      if (s.excitations(a) + 1 > kExcitationCap)
        throw std::domain_error("state exceeds the excitation cap");
      cross += static_cast<int>(c.particles.size()) + detail::count_above(c.holes, level);
      detail::sorted_insert(c.holes, level);
    } else {
      if (!detail::sorted_contains(c.particles, level)) return std::nullopt;
      cross += detail::count_below(c.particles, level);
      detail::sorted_erase(c.particles, level);
    }
  }
  return PsiResult{std::move(out), cross % 2 == 0 ? 1 : -1};
}

// Finite linear combination of wedge states with polynomial coefficients.
class FockVector {
 public:
  FockVector() = default;

  static FockVector unit(const WedgeState& s) {
    FockVector v;
    v.t_[s] = Poly(1);
    return v;
  }

  static FockVector vacuum(int n) { return unit(WedgeState::vacuum(n)); }

  const std::map<WedgeState, Poly>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }

  void add(const WedgeState& s, const Poly& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = t_.emplace(s, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) t_.erase(it);
    }
  }

  Poly coeff(const WedgeState& s) const {
    auto it = t_.find(s);
    return it == t_.end() ? Poly() : it->second;
  }

  FockVector scaled(const Rational& c) const {
    FockVector v;
    if (c == 0) return v;
    for (const auto& [s, p] : t_) v.t_[s] = p * Poly(c);
    return v;
  }

  FockVector scaled(const Poly& c) const {
    FockVector v;
    if (c.is_zero()) return v;
    for (const auto& [s, p] : t_) v.t_[s] = p * c;
    return v;
  }

  FockVector& operator+=(const FockVector& o) {
    for (const auto& [s, p] : o.t_) add(s, p);
    return *this;
  }

  friend bool operator==(const FockVector& a, const FockVector& b) { return a.t_ == b.t_; }

  std::string str() const {
    if (t_.empty()) return "0";
    std::string s;
    for (const auto& [st, p] : t_) {
      if (!s.empty()) s += " + ";
      s += "(" + p.str() + ")*[" + st.str() + "]";
    }
    return s;
  }

 private:
  std::map<WedgeState, Poly> t_;
};

inline FockVector apply_psi(int a, int dir, int mode, const FockVector& v) {
  FockVector out;
  for (const auto& [s, c] : v.terms()) {
    auto r = psi_apply(s, a, dir, mode);
    if (r) out.add(r->state, r->sign > 0 ? c : -c);
  }
  return out;
}

// Orthonormal wedge basis; the form is symmetric and bilinear.
inline Poly pairing(const FockVector& u, const FockVector& v) {
  Poly p;
  const auto& a = u.terms();
  const auto& b = v.terms();
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first)
      ++ia;
    else if (ib->first < ia->first)
      ++ib;
    else {
      p += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return p;
}

// Charge shift of one component. Conjugating a mode operator moves its index
// by one step within the component and flips sign against every other
// component, so the action on a basis state is: rewrite its canonical
// monomial with shifted modes, then replay it on the shifted vacuum.
inline FockVector apply_Q(int a, int dir, const FockVector& v) {
  FockVector out;
  for (const auto& [s, c] : v.terms()) {
    int others = 0;
    for (int b = 0; b < s.components(); ++b)
      if (b != a) others += s.excitations(b);

    WedgeState seed = WedgeState::vacuum(s.components());
    if (dir > 0)
      seed.comp[a].particles = {-1};
    else
      seed.comp[a].holes = {0};

    // Canonical monomial of s, modes of component a shifted: components
    // descending, creation modes increasing, then annihilation modes
    // increasing. Replay right to left.
    std::vector<std::pair<int, std::pair<int, int>>> ops;  // (comp, (dir, mode))
    for (int b = s.components() - 1; b >= 0; --b) {
      for (int p : s.comp[b].particles) {
        int mode = (b == a) ? (dir > 0 ? p - 1 : p + 1) : p;
        ops.push_back({b, {+1, mode}});
      }
      for (auto h = s.comp[b].holes.rbegin(); h != s.comp[b].holes.rend(); ++h) {
        int mode = -*h - 1;
        if (b == a) mode = dir > 0 ? mode + 1 : mode - 1;
        ops.push_back({b, {-1, mode}});
      }
    }

    int sign = others % 2 == 0 ? 1 : -1;
    std::optional<PsiResult> cur = PsiResult{std::move(seed), sign};
    for (auto it = ops.rbegin(); it != ops.rend() && cur; ++it) {
      auto r = psi_apply(cur->state, it->first, it->second.first, it->second.second);
      if (!r) {
        cur.reset();
        break;
      }
      cur = PsiResult{std::move(r->state), cur->sign * r->sign};
    }
    if (cur) out.add(cur->state, cur->sign > 0 ? c : -c);
  }
  return out;
}

inline FockVector apply_Q_power(int a, int e, const FockVector& v) {
  FockVector out = v;
  for (int i = 0; i < std::abs(e); ++i) out = apply_Q(a, e > 0 ? +1 : -1, out);
  return out;
}

// Q_{n-1}^{e_{n-1}} ... Q_1^{e_1} Q_0^{e_0} applied to the vacuum; the
// component-descending product is the canonical one, so the result is a
// single wedge state.
inline FockVector translation_states(int n, const std::vector<int>& exponents) {
  if (static_cast<int>(exponents.size()) != n)
    throw std::invalid_argument("one exponent per component");
  FockVector v = FockVector::vacuum(n);
  for (int a = 0; a < n; ++a) v = apply_Q_power(a, exponents[a], v);
  return v;
}

// T_{hi,lo} = Q_hi Q_lo^{-1}; dir -1 applies the inverse.
inline FockVector apply_translation(int hi, int lo, int dir, const FockVector& v) {
  if (dir > 0) return apply_Q(hi, +1, apply_Q(lo, -1, v));
  return apply_Q(lo, +1, apply_Q(hi, -1, v));
}

// Mode j of the off-diagonal raising field between components a and b: the
// sum over l of (wedge a at j+l)(contract b at level l). Only finitely many l
// act on a given state.
inline FockVector apply_E(int a, int b, int j, const FockVector& v) {
  if (a == b) throw std::invalid_argument("diagonal field needs normal ordering");
  FockVector out;
  for (const auto& [s, c] : v.terms()) {
    std::set<int> ls;
    for (int p : s.comp[b].particles) ls.insert(p);
    for (int l = 0; l <= -j - 1; ++l) ls.insert(l);
    for (int h : s.comp[a].holes)
      if (h - j >= 0) ls.insert(h - j);
    for (int l : ls) {
      auto r1 = psi_apply(s, b, -1, -l - 1);
      if (!r1) continue;
      auto r2 = psi_apply(r1->state, a, +1, j + l);
      if (!r2) continue;
      out.add(r2->state, r1->sign * r2->sign > 0 ? c : -c);
    }
  }
  return out;
}

// Window-clipped raising operator of one coefficient family: the sum over m
// in the window of x_m times the field mode at shift-m-1. Family c acts
// between components (1,0); d and e need three components and act between
// (2,0) and (2,1).
inline FockVector apply_Gamma(char family, int shift, const FockVector& v, const Window& w) {
  if (v.is_zero()) return v;
  int n = v.terms().begin()->first.components();
  int a, b;
  switch (family) {
    case 'c':
      a = 1;
      b = 0;
      break;
    case 'd':
      a = 2;
      b = 0;
      break;
    case 'e':
      a = 2;
      b = 1;
      break;
    default:
      throw std::invalid_argument("unknown coefficient family");
  }
  if (a >= n) throw std::invalid_argument("family needs more components");
  FockVector out;
  for (int m = w.lo; m <= w.hi; ++m)
    out += apply_E(a, b, shift - m - 1, v).scaled(Poly::var({family, m}));
  return out;
}

// Tau function as a vacuum matrix element. n = 2 pairs T^k against the
// exponential of the c-family raising operator at shift alpha; n = 3 pairs
// T_1^k T_2^l against the product of exponentials with shifts alpha-beta,
// alpha, beta. Grading picks out finitely many exponential terms: the
// c/d/e-degrees (s, r, t) satisfy s + r = k and t + r = l.
inline Poly tau_via_fock(int n, int k, int l, int alpha, int beta, const Window& w,
                         int bound = 4) {
  if (n == 2) {
    if (l != 0 || beta != 0)
      throw std::invalid_argument("two-component tau takes no second index");
    if (k > bound) throw std::invalid_argument("tau index beyond the configured bound");
    if (k < 0) return Poly();
    FockVector ket = FockVector::vacuum(2);
    for (int i = 0; i < k; ++i) ket = apply_Gamma('c', alpha, ket, w);
    ket = ket.scaled(make_rational(1, factorial(k)));
    FockVector bra = FockVector::vacuum(2);
    for (int i = 0; i < k; ++i) bra = apply_translation(1, 0, +1, bra);
    return pairing(bra, ket);
  }
  if (n != 3) throw std::invalid_argument("tau oracle covers two or three components");
  if (k + l > bound) throw std::invalid_argument("tau index beyond the configured bound");
  if (k < 0 || l < 0) return Poly();

  std::vector<FockVector> epow(l + 1);
  epow[0] = FockVector::vacuum(3);
  for (int t = 1; t <= l; ++t) epow[t] = apply_Gamma('e', beta, epow[t - 1], w);

  FockVector ket;
  for (int r = 0; r <= std::min(k, l); ++r) {
    int s = k - r;
    int t = l - r;
    FockVector v = epow[t];
    for (int i = 0; i < r; ++i) v = apply_Gamma('d', alpha, v, w);
    for (int i = 0; i < s; ++i) v = apply_Gamma('c', alpha - beta, v, w);
    ket += v.scaled(make_rational(1, factorial(s) * factorial(r) * factorial(t)));
  }

  FockVector bra = FockVector::vacuum(3);
  for (int i = 0; i < l; ++i) bra = apply_translation(2, 1, +1, bra);
  for (int i = 0; i < k; ++i) bra = apply_translation(1, 0, +1, bra);
  return pairing(bra, ket);
}

// Negative Birkhoff factor of the two-component theory, entry by entry: the
// coefficient of z^{-j-1} in row a, column b is the matrix element of the
// contraction mode j between the charge-lowered vacuum on the left and
// T^{-k} exp(Gamma) applied to the vacuum on the right, divided by tau_k.
// Grading fixes the exponential degree at k + a - b.
inline FLoopMatrix birkhoff_negative_fock2(int k, int alpha, const Window& w, int N) {
  if (k < 0) throw std::invalid_argument("negative factor needs k >= 0");
  Poly tau = tau_via_fock(2, k, 0, alpha, 0, w);
  if (tau.is_zero()) throw std::domain_error("tau function vanishes on this window");

  FLoopMatrix g(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      int deg = k + a - b;
      FSeries entry = FSeries::with_trunc(N);
      if (deg >= 0) {
        FockVector ket = FockVector::vacuum(2);
        for (int i = 0; i < deg; ++i) ket = apply_Gamma('c', alpha, ket, w);
        ket = ket.scaled(make_rational(1, factorial(deg)));
        for (int i = 0; i < k; ++i) ket = apply_translation(1, 0, -1, ket);
        FockVector bra = apply_Q(b, -1, FockVector::vacuum(2));
        for (int j = -1; j < N; ++j) {
          Poly num = pairing(bra, apply_psi(a, -1, j, ket));
          if (!num.is_zero()) entry.set_coeff(-j - 1, RatFunc(num, tau));
        }
      }
      g.at(a, b) = entry;
    }
  return g;
}

// ---------------------------------------------------------------------------
// Truncated Laurent data. Field correlation functions expand contraction
// fields into modes with negative exponents, which the polynomial ring does
// not hold; this container keys terms by exponent maps instead.

class Laurent {
 public:
  using Exps = std::map<VarId, int>;
  using Keep = std::function<bool(const Exps&)>;

  Laurent() = default;

  static Laurent one() {
    Laurent l;
    l.t_[{}] = 1;
    return l;
  }

  static Laurent from_poly(const Poly& p) {
    Laurent l;
    for (const auto& [m, c] : p.terms()) {
      Exps e;
      for (const auto& [v, k] : m.factors()) e[v] = k;
      l.t_[e] = c;
    }
    return l;
  }

  const std::map<Exps, Rational>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  size_t size() const { return t_.size(); }

  void add_term(const Exps& e, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = t_.emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) t_.erase(it);
    }
  }

  Laurent& operator+=(const Laurent& o) {
    for (const auto& [e, c] : o.t_) add_term(e, c);
    return *this;
  }

  Laurent scaled(const Rational& c) const {
    Laurent r;
    if (c == 0) return r;
    for (const auto& [e, k] : t_) r.t_[e] = k * c;
    return r;
  }

  // Multiply by one variable power; the exponent may be negative.
  Laurent shifted(VarId v, int exp) const {
    if (exp == 0) return *this;
    Laurent r;
    for (const auto& [e, c] : t_) {
      Exps e2 = e;
      auto it = e2.find(v);
      int k = (it == e2.end() ? 0 : it->second) + exp;
      if (it != e2.end()) e2.erase(it);
      if (k != 0) e2[v] = k;
      r.t_[e2] = c;
    }
    return r;
  }

  Laurent multiplied(const Laurent& o, const Keep& keep = {}) const {
    Laurent r;
    for (const auto& [ea, ca] : t_)
      for (const auto& [eb, cb] : o.t_) {
        Exps e = ea;
        for (const auto& [v, k] : eb) {
          auto it = e.find(v);
          int s = (it == e.end() ? 0 : it->second) + k;
          if (it != e.end()) e.erase(it);
          if (s != 0) e[v] = s;
        }
        if (keep && !keep(e)) continue;
        r.add_term(e, ca * cb);
      }
    return r;
  }

  Laurent filtered(const Keep& keep) const {
    Laurent r;
    for (const auto& [e, c] : t_)
      if (keep(e)) r.t_[e] = c;
    return r;
  }

  Poly to_poly() const {
    Poly p;
    for (const auto& [e, c] : t_) {
      Monomial m;
      for (const auto& [v, k] : e) {
        if (k < 0) throw std::domain_error("negative exponent is not polynomial");
        m = m * Monomial::var(v, k);
      }
      p.add_term(m, c);
    }
    return p;
  }

  friend bool operator==(const Laurent& a, const Laurent& b) { return a.t_ == b.t_; }

  static std::string term_string(const Exps& e, const Rational& c) {
    std::string s = rational_string(c);
    for (const auto& [v, k] : e) s += "*" + var_string(v) + "^" + std::to_string(k);
    return s;
  }

  // First term where the two sides disagree.
  static std::string first_diff(const Laurent& a, const Laurent& b) {
    for (const auto& [e, c] : a.t_) {
      auto it = b.t_.find(e);
      if (it == b.t_.end() || it->second != c) return term_string(e, c);
    }
    for (const auto& [e, c] : b.t_)
      if (!a.t_.count(e)) return term_string(e, c);
    return "";
  }

  std::string str() const {
    if (t_.empty()) return "0";
    std::string s;
    for (const auto& [e, c] : t_) {
      if (!s.empty()) s += " + ";
      s += term_string(e, c);
    }
    return s;
  }

 private:
  std::map<Exps, Rational> t_;
};

namespace detail {

// Excitation moves needed to turn s into t; every field application changes
// it by exactly one, which prunes states that can no longer reach the target.
inline int state_distance(const WedgeState& s, const WedgeState& t) {
  auto sym = [](const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> d;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(d));
    return static_cast<int>(d.size());
  };
  int dist = 0;
  for (int a = 0; a < s.components(); ++a) {
    dist += sym(s.comp[a].particles, t.comp[a].particles);
    dist += sym(s.comp[a].holes, t.comp[a].holes);
  }
  return dist;
}

using CorrTerms = std::map<WedgeState, Laurent>;

struct FieldFactor {
  int comp;
  int dir;
  VarId var;
};

inline CorrTerms apply_field(const CorrTerms& v, const FieldFactor& f, int mode_lo, int mode_hi,
                             const WedgeState& target, int fields_left) {
  CorrTerms out;
  for (const auto& [s, coeff] : v)
    for (int mode = mode_lo; mode <= mode_hi; ++mode) {
      auto r = psi_apply(s, f.comp, f.dir, mode);
      if (!r) continue;
      if (state_distance(r->state, target) > fields_left) continue;
      Laurent term = coeff.scaled(r->sign).shifted(f.var, -mode - 1);
      auto [it, fresh] = out.emplace(r->state, term);
      if (!fresh) it->second += term;
    }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

// Single-component target of the given charge.
inline WedgeState charged_state(int n, int a, int q) {
  WedgeState s = WedgeState::vacuum(n);
  for (int i = 1; i <= q; ++i) s.comp[a].particles.push_back(-q + i - 1);
  for (int i = 0; i < -q; ++i) s.comp[a].holes.push_back(i);
  return s;
}

inline Laurent correlation_element(const std::vector<FieldFactor>& fields,
                                   const std::vector<std::pair<int, int>>& mode_ranges,
                                   const WedgeState& target, int n) {
  CorrTerms acc;
  acc[WedgeState::vacuum(n)] = Laurent::one();
  for (size_t i = 0; i < fields.size(); ++i)
    acc = apply_field(acc, fields[i], mode_ranges[i].first, mode_ranges[i].second, target,
                      static_cast<int>(fields.size() - 1 - i));
  auto it = acc.find(target);
  return it == acc.end() ? Laurent() : it->second;
}

}  // namespace detail

// Same-species correlation: the matrix element of k wedging (or k
// contracting) fields between the charge +-k vacuum and the vacuum equals the
// Vandermonde product over the expansion variables. Exact, no truncation.
struct CorrelationPP {
  Poly lhs;
  Poly rhs;
  bool match() const { return (lhs - rhs).is_zero(); }
};

inline CorrelationPP correlation_pp(int count, int dir) {
  if (count < 0 || count > 6) throw std::invalid_argument("field count out of range");
  std::vector<detail::FieldFactor> fields;
  std::vector<std::pair<int, int>> ranges;
  for (int i = 1; i <= count; ++i) {
    fields.push_back({0, dir, {'z', i}});
    ranges.push_back({-count, -1});
  }
  WedgeState target = detail::charged_state(1, 0, dir > 0 ? count : -count);
  CorrelationPP r;
  r.lhs = detail::correlation_element(fields, ranges, target, 1).to_poly();
  r.rhs = Poly(1);
  for (int j = 2; j <= count; ++j)
    for (int i = 1; i < j; ++i)
      r.rhs *= Poly::var({'z', j}) - Poly::var({'z', i});
  return r;
}

// Truncated comparison of a mixed correlation against its product formula.
// Both sides are restricted to the window where each y-exponent is at most M
// and each w (and z) exponent is at least -(M+1); on that window both the
// mode expansion and the geometric expansions of the denominators are
// complete.
struct CorrelationCheck {
  Laurent lhs;
  Laurent rhs;
  int truncation = 0;
  bool match() const { return lhs == rhs; }
  std::string witness() const { return Laurent::first_diff(lhs, rhs); }
};

namespace detail {

inline Laurent::Keep box_keep(int M, int w_hi) {
  return [M, w_hi](const Laurent::Exps& e) {
    for (const auto& [v, k] : e) {
      if (v.family == 'y' && k > M) return false;
      if ((v.family == 'w' || v.family == 'z') && (k < -(M + 1) || k > w_hi)) return false;
    }
    return true;
  };
}

// 1/(a - b) expanded as sum_{q>=0} b^q a^{-q-1} to the given depth.
inline Laurent geometric(VarId a, VarId b, int depth, const Laurent::Keep& keep) {
  Laurent r;
  for (int q = 0; q <= depth; ++q) {
    Laurent::Exps e;
    if (q != 0) e[b] = q;
    e[a] = -q - 1;
    if (!keep || keep(e)) r.add_term(e, 1);
  }
  return r;
}

}  // namespace detail

// Charge m-n correlation: m wedging fields in w variables against n
// contracting fields in y variables.
inline CorrelationCheck correlation_mn(int m, int n, int M) {
  if (m < 0 || n < 0 || m > 4 || n > 4) throw std::invalid_argument("field count out of range");
  if (M < std::max(m, n)) throw std::invalid_argument("truncation too small for field count");

  std::vector<detail::FieldFactor> fields;
  std::vector<std::pair<int, int>> ranges;
  for (int j = n; j >= 1; --j) {
    fields.push_back({0, -1, {'y', j}});
    ranges.push_back({-(M + 1), -1});
  }
  for (int i = m; i >= 1; --i) {
    fields.push_back({0, +1, {'w', i}});
    ranges.push_back({-(M + 2), M});
  }
  WedgeState target = detail::charged_state(1, 0, m - n);
  auto region = detail::box_keep(M, M + 1);

  CorrelationCheck r;
  r.truncation = M;
  r.lhs = detail::correlation_element(fields, ranges, target, 1).filtered(region);

  Poly num(1);
  for (int i = 1; i < m; ++i)
    for (int j = i + 1; j <= m; ++j) num *= Poly::var({'w', i}) - Poly::var({'w', j});
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) num *= Poly::var({'y', i}) - Poly::var({'y', j});
  Laurent rhs = Laurent::from_poly(num);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= n; ++j)
      rhs = rhs.multiplied(detail::geometric({'w', i}, {'y', j}, M, {}), region);
  r.rhs = rhs.filtered(region);
  return r;
}

// Charge m-n-1 correlation with one extra contracting field in the scalar
// variable z: the product formula gains the factor
// prod_i (z - y_i) / prod_i (z - w_i), the z-w factors expanded in positive
// powers of w.
inline CorrelationCheck correlation_extra(int m, int n, int M) {
  if (m < 0 || n < 0 || m > 4 || n > 4) throw std::invalid_argument("field count out of range");
  if (M < std::max(m, n) + 1) throw std::invalid_argument("truncation too small for field count");

  std::vector<detail::FieldFactor> fields;
  std::vector<std::pair<int, int>> ranges;
  for (int j = n; j >= 1; --j) {
    fields.push_back({0, -1, {'y', j}});
    ranges.push_back({-(M + 1), -1});
  }
  for (int i = m; i >= 1; --i) {
    fields.push_back({0, +1, {'w', i}});
    ranges.push_back({-(M + 2), M});
  }
  fields.push_back({0, -1, {'z', 0}});
  ranges.push_back({-(M + 2), M});
  WedgeState target = detail::charged_state(1, 0, m - n - 1);
  auto region = detail::box_keep(M, M + 1);

  CorrelationCheck r;
  r.truncation = M;
  r.lhs = detail::correlation_element(fields, ranges, target, 1).filtered(region);

  Poly num(1);
  for (int i = 1; i <= n; ++i) num *= Poly::var({'z', 0}) - Poly::var({'y', i});
  for (int i = 1; i < m; ++i)
    for (int j = i + 1; j <= m; ++j) num *= Poly::var({'w', i}) - Poly::var({'w', j});
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) num *= Poly::var({'y', i}) - Poly::var({'y', j});

  // The z expansions push w exponents above the reporting box before the
  // w expansions bring them back down, so the wide bound stays in force
  // until every factor is in.
  int w_max = (M + 1) + n * (M + 1) + m + 2;
  auto stage = detail::box_keep(M, w_max);
  Laurent rhs = Laurent::from_poly(num);
  for (int i = 1; i <= m; ++i)
    rhs = rhs.multiplied(detail::geometric({'z', 0}, {'w', i}, w_max, {}), stage);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= n; ++j)
      rhs = rhs.multiplied(detail::geometric({'w', i}, {'y', j}, M, {}), stage);
  r.rhs = rhs.filtered(region);
  return r;
}

// Multi-component matrix elements factor over components, and each factor
// equals its one-component counterpart. The joint element pairs the full
// field monomial (components descending, wedging block before contracting
// block, argument indices descending within a block) against the matching
// product of charge shifts.
struct FactorizationCheck {
  Laurent joint;
  Laurent product;
  bool factor_match = false;
  bool reduction_match = false;
  bool match() const { return factor_match && reduction_match; }
};

struct ComponentFields {
  std::vector<VarId> plus;
  std::vector<VarId> minus;
};

inline FactorizationCheck factorization_check(const std::vector<ComponentFields>& mono, int M) {
  int n = static_cast<int>(mono.size());
  if (n < 1) throw std::invalid_argument("at least one component");

  auto build = [&](int a) {
    std::pair<std::vector<detail::FieldFactor>, std::vector<std::pair<int, int>>> fs;
    for (size_t j = 0; j < mono[a].minus.size(); ++j) {
      fs.first.push_back({a, -1, mono[a].minus[j]});
      fs.second.push_back({-(M + 1), -1});
    }
    for (size_t i = 0; i < mono[a].plus.size(); ++i) {
      fs.first.push_back({a, +1, mono[a].plus[i]});
      fs.second.push_back({-(M + 2), M});
    }
    return fs;
  };

  std::vector<int> exps(n);
  for (int a = 0; a < n; ++a)
    exps[a] = static_cast<int>(mono[a].plus.size()) - static_cast<int>(mono[a].minus.size());

  std::set<VarId> plus_vars, minus_vars;
  for (const auto& c : mono) {
    plus_vars.insert(c.plus.begin(), c.plus.end());
    minus_vars.insert(c.minus.begin(), c.minus.end());
  }
  auto region = [&, M](const Laurent::Exps& e) {
    for (const auto& [v, k] : e) {
      if (minus_vars.count(v) && k > M) return false;
      if (plus_vars.count(v) && (k < -(M + 1) || k > M + 1)) return false;
    }
    return true;
  };

  std::vector<detail::FieldFactor> fields;
  std::vector<std::pair<int, int>> ranges;
  for (int a = 0; a < n; ++a) {
    auto fs = build(a);
    fields.insert(fields.end(), fs.first.begin(), fs.first.end());
    ranges.insert(ranges.end(), fs.second.begin(), fs.second.end());
  }
  WedgeState target = translation_states(n, exps).terms().begin()->first;

  FactorizationCheck r;
  r.joint = detail::correlation_element(fields, ranges, target, n).filtered(region);

  Laurent product = Laurent::one();
  bool reduced_ok = true;
  for (int a = 0; a < n; ++a) {
    auto fs = build(a);
    std::vector<int> solo(n, 0);
    solo[a] = exps[a];
    WedgeState t = translation_states(n, solo).terms().begin()->first;
    Laurent factor = detail::correlation_element(fs.first, fs.second, t, n);

    // One-component reduction: the same monomial on a single component gives
    // the same element.
    std::vector<detail::FieldFactor> f1 = fs.first;
    for (auto& f : f1) f.comp = 0;
    WedgeState t1 = detail::charged_state(1, 0, exps[a]);
    if (!(detail::correlation_element(f1, fs.second, t1, 1) == factor)) reduced_ok = false;

    product = product.multiplied(factor, {});
  }
  r.product = product.filtered(region);
  r.factor_match = r.joint == r.product;
  r.reduction_match = reduced_ok;
  return r;
}

// ---------------------------------------------------------------------------
// Identity suites: polynomial and rational determinant identities plus the
// operator rewrites, each case reported with a witness on failure.

namespace detail {

inline Poly vandermonde_poly(int k) {
  Poly p(1);
  for (int j = 2; j <= k; ++j)
    for (int i = 1; i < j; ++i) p *= Poly::var({'z', j}) - Poly::var({'z', i});
  return p;
}

inline Rational det_rational(std::vector<std::vector<Rational>> m) {
  int sz = static_cast<int>(m.size());
  Rational det = 1;
  for (int col = 0; col < sz; ++col) {
    int pivot = -1;
    for (int r = col; r < sz; ++r)
      if (m[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) return Rational(0);
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < sz; ++r) {
      Rational f = m[r][col] / m[col][col];
      for (int c = col; c < sz; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

inline std::string exc_string(const WedgeState& s) { return s.str(); }

}  // namespace detail

// det(V)^2 as a sum over permutations of single-power determinants.
inline CaseResult vandermonde_square_case(int k) {
  CaseResult c;
  c.params = "k=" + std::to_string(k);
  Poly dv = detail::vandermonde_poly(k);
  Poly lhs = dv * dv;
  Poly rhs;
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i + 1;
  do {
    PolyMatrix m(k, std::vector<Poly>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        m[i][j] = i + j == 0 ? Poly(1) : Poly::var({'z', perm[i]}, i + j);
    rhs += det_leibniz(m);
  } while (std::next_permutation(perm.begin(), perm.end()));
  Poly diff = lhs - rhs;
  c.pass = diff.is_zero();
  c.residual_terms = static_cast<long>(diff.terms().size());
  if (!c.pass) c.witness = diff.str().substr(0, 120);
  return c;
}

// The k x k moment determinant equals 1/k! times the squared Vandermonde with
// every power z_i^t replaced by the coefficient c_{t+alpha}.
inline CaseResult hankel_pairing_case(int k, int alpha) {
  CaseResult c;
  c.params = "k=" + std::to_string(k) + " alpha=" + std::to_string(alpha);
  PolyMatrix h(k, std::vector<Poly>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) h[i][j] = Poly::var({'c', alpha + i + j});
  Poly lhs = det_leibniz(h);

  Poly dv = detail::vandermonde_poly(k);
  Poly sq = dv * dv;
  Poly rhs;
  for (const auto& [mono, coef] : sq.terms()) {
    Monomial image;
    for (int i = 1; i <= k; ++i)
      image = image * Monomial::var({'c', alpha + mono.exponent({'z', i})});
    rhs.add_term(image, coef);
  }
  rhs = rhs.divided_by(Rational(factorial(k)));

  Poly diff = lhs - rhs;
  c.pass = diff.is_zero();
  c.residual_terms = static_cast<long>(diff.terms().size());
  if (!c.pass) c.witness = diff.str().substr(0, 120);
  return c;
}

// Mixed Cauchy/Vandermonde determinant evaluations, checked at random
// distinct rational points with the identity cross-multiplied. Four layouts:
// 1: m>=n>=0, m>=1   rows (w_n..w_1 fractions, then powers), columns y_1..y_m
// 2: 0<=m<n          rows (powers, then y_m..y_1 fractions), columns w_1..w_n
// 3: 0<=n<m          rows (1/(z-w), powers, y_n..y_1 fractions), columns w
// 4: 0<=m<=n         bordered: columns (z, y_1..y_n), rows (w_m..w_1
//                    fractions with -1/(z-w) first, then powers), LHS scaled
//                    by (-1)^m
inline CaseResult cauchy_vandermonde_case(int kind, int m, int n, Rng& rng) {
  CaseResult c;
  c.params = "kind=" + std::to_string(kind) + " m=" + std::to_string(m) +
             " n=" + std::to_string(n);

  int nw = 0, ny = 0;
  bool use_z = kind >= 3;
  switch (kind) {
    case 1:
      nw = n;
      ny = m;
      break;
    case 2:
      nw = n;
      ny = m;
      break;
    case 3:
      nw = m;
      ny = n;
      break;
    case 4:
      nw = m;
      ny = n;
      break;
    default:
      throw std::invalid_argument("unknown layout");
  }

  std::vector<Rational> w(nw + 1), y(ny + 1);
  Rational z;
  std::set<std::pair<std::string, std::string>> seen;
  auto draw = [&]() {
    while (true) {
      Rational v = rng.rational(19, 6);
      auto key = std::make_pair(v.get_num().get_str(), v.get_den().get_str());
      if (seen.insert(key).second) return v;
    }
  };
  for (int i = 1; i <= nw; ++i) w[i] = draw();
  for (int i = 1; i <= ny; ++i) y[i] = draw();
  if (use_z) z = draw();

  std::vector<std::vector<Rational>> mat;
  Rational lhs_scale = 1;
  Rational num = 1, den = 1;

  if (kind == 1) {
    mat.assign(m, std::vector<Rational>(m));
    for (int r = 0; r < n; ++r)
      for (int j = 1; j <= m; ++j) mat[r][j - 1] = Rational(1) / (w[n - r] - y[j]);
    for (int r = n; r < m; ++r)
      for (int j = 1; j <= m; ++j) mat[r][j - 1] = rational_pow(y[j], m - 1 - r);
    for (int i = 1; i < m; ++i)
      for (int j = i + 1; j <= m; ++j) num *= y[i] - y[j];
    for (int i = 1; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) num *= w[i] - w[j];
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= m; ++j) den *= w[i] - y[j];
  } else if (kind == 2) {
    mat.assign(n, std::vector<Rational>(n));
    for (int r = 0; r < n - m; ++r)
      for (int j = 1; j <= n; ++j) mat[r][j - 1] = rational_pow(w[j], n - m - 1 - r);
    for (int r = n - m; r < n; ++r)
      for (int j = 1; j <= n; ++j) mat[r][j - 1] = Rational(1) / (w[j] - y[m - (r - (n - m))]);
    for (int i = 1; i < m; ++i)
      for (int j = i + 1; j <= m; ++j) num *= y[i] - y[j];
    for (int i = 1; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) num *= w[i] - w[j];
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= m; ++j) den *= w[i] - y[j];
  } else if (kind == 3) {
    mat.assign(m, std::vector<Rational>(m));
    for (int j = 1; j <= m; ++j) mat[0][j - 1] = Rational(1) / (z - w[j]);
    for (int r = 1; r < m - n; ++r)
      for (int j = 1; j <= m; ++j) mat[r][j - 1] = rational_pow(w[j], m - n - 1 - r);
    for (int r = m - n; r < m; ++r)
      for (int j = 1; j <= m; ++j) mat[r][j - 1] = Rational(1) / (w[j] - y[n - (r - (m - n))]);
    for (int i = 1; i <= n; ++i) num *= z - y[i];
    for (int i = 1; i < m; ++i)
      for (int j = i + 1; j <= m; ++j) num *= w[i] - w[j];
    for (int i = 1; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) num *= y[i] - y[j];
    for (int i = 1; i <= m; ++i) den *= z - w[i];
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= n; ++j) den *= w[i] - y[j];
  } else {
    mat.assign(n + 1, std::vector<Rational>(n + 1));
    for (int r = 0; r < m; ++r) {
      mat[r][0] = Rational(-1) / (z - w[m - r]);
      for (int j = 1; j <= n; ++j) mat[r][j] = Rational(1) / (w[m - r] - y[j]);
    }
    for (int r = m; r <= n; ++r) {
      int p = n - r;
      mat[r][0] = rational_pow(z, p);
      for (int j = 1; j <= n; ++j) mat[r][j] = rational_pow(y[j], p);
    }
    if (m % 2 != 0) lhs_scale = -1;
    for (int i = 1; i <= n; ++i) num *= z - y[i];
    for (int i = 1; i < m; ++i)
      for (int j = i + 1; j <= m; ++j) num *= w[i] - w[j];
    for (int i = 1; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) num *= y[i] - y[j];
    for (int i = 1; i <= m; ++i) den *= z - w[i];
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= n; ++j) den *= w[i] - y[j];
  }

  Rational lhs = lhs_scale * detail::det_rational(std::move(mat));
  Rational diff = lhs * den - num;
  c.pass = diff == 0;
  c.residual_terms = c.pass ? 0 : 1;
  if (!c.pass) {
    c.witness = "det=" + rational_string(lhs) + " expected=" + rational_string(num) + "/" +
                rational_string(den);
  }
  return c;
}

// Conjugating the raising field mode by charge shifts of both components
// moves the mode index by alpha+beta and flips the sign accordingly:
// Q_0^b Q_1^{-a} (E z^j) Q_1^a Q_0^{-b} = (-1)^{a+b} E z^{j+a+b}.
inline CaseResult field_twist_case(int alpha, int beta, int j,
                                   const std::vector<WedgeState>& basis) {
  CaseResult c;
  c.params = "alpha=" + std::to_string(alpha) + " beta=" + std::to_string(beta) +
             " j=" + std::to_string(j);
  Rational sign = (alpha + beta) % 2 == 0 ? 1 : -1;
  for (const auto& s : basis) {
    FockVector v = FockVector::unit(s);
    FockVector lhs = apply_Q_power(0, -beta, v);
    lhs = apply_Q_power(1, alpha, lhs);
    lhs = apply_E(1, 0, j, lhs);
    lhs = apply_Q_power(1, -alpha, lhs);
    lhs = apply_Q_power(0, beta, lhs);
    FockVector rhs = apply_E(1, 0, j + alpha + beta, v).scaled(sign);
    if (!(lhs == rhs)) {
      c.pass = false;
      c.residual_terms += 1;
      if (c.witness.empty()) c.witness = "state " + detail::exc_string(s);
    }
  }
  return c;
}

// T^k Q_b^{-1} = (-1)^{k(k-1)/2} (-1)^{bk} Q_1^{k-b} Q_0^{b-k-1} as operators.
inline CaseResult translation_rewrite_case(int k, int b,
                                           const std::vector<WedgeState>& basis) {
  CaseResult c;
  c.params = "k=" + std::to_string(k) + " b=" + std::to_string(b);
  int e = (k * (k - 1) / 2 + b * k) % 2;
  Rational sign = e == 0 ? 1 : -1;
  for (const auto& s : basis) {
    FockVector v = FockVector::unit(s);
    FockVector lhs = apply_Q(b, -1, v);
    for (int i = 0; i < k; ++i) lhs = apply_translation(1, 0, +1, lhs);
    FockVector rhs = apply_Q_power(0, b - k - 1, v);
    rhs = apply_Q_power(1, k - b, rhs);
    rhs = rhs.scaled(sign);
    if (!(lhs == rhs)) {
      c.pass = false;
      c.residual_terms += 1;
      if (c.witness.empty()) c.witness = "state " + detail::exc_string(s);
    }
  }
  return c;
}

// Every two-component basis state with the given excitation budget, levels
// drawn from [-2,-1] and [0,1] per component.
inline std::vector<WedgeState> small_basis2(int max_excitations) {
  std::vector<std::vector<int>> subsets = {{}, {0}, {1}, {0, 1}};
  std::vector<WedgeState> out;
  for (const auto& p1 : subsets)
    for (const auto& h1 : subsets)
      for (const auto& p0 : subsets)
        for (const auto& h0 : subsets) {
          WedgeState s = WedgeState::vacuum(2);
          for (int i : p1) s.comp[1].particles.push_back(-2 + i);
          for (int i : h1) s.comp[1].holes.push_back(i);
          for (int i : p0) s.comp[0].particles.push_back(-2 + i);
          for (int i : h0) s.comp[0].holes.push_back(i);
          if (s.excitations(0) + s.excitations(1) <= max_excitations) out.push_back(s);
        }
  return out;
}

inline VerificationReport identity_suites(uint64_t seed, int max_mn = 5) {
  if (max_mn < 1 || max_mn > 5) throw std::invalid_argument("size cap out of range");
  VerificationReport report;

  SuiteReport perm{"permutation-expansion", {}};
  for (int k = 0; k <= 4; ++k) perm.cases.push_back(vandermonde_square_case(k));
  report.suites.push_back(std::move(perm));

  SuiteReport heine{"hankel-pairing", {}};
  for (int k = 0; k <= 3; ++k)
    for (int alpha = -1; alpha <= 1; ++alpha) heine.cases.push_back(hankel_pairing_case(k, alpha));
  report.suites.push_back(std::move(heine));

  SuiteReport cv{"cauchy-vandermonde", {}};
  Rng rng(seed);
  for (int rep = 0; rep < 3; ++rep) {
    for (int m = 1; m <= max_mn; ++m)
      for (int n = 0; n <= m; ++n) cv.cases.push_back(cauchy_vandermonde_case(1, m, n, rng));
    for (int n = 1; n <= max_mn; ++n)
      for (int m = 0; m < n; ++m) cv.cases.push_back(cauchy_vandermonde_case(2, m, n, rng));
    for (int m = 1; m <= max_mn; ++m)
      for (int n = 0; n < m; ++n) cv.cases.push_back(cauchy_vandermonde_case(3, m, n, rng));
    for (int n = 0; n <= max_mn; ++n)
      for (int m = 0; m <= n; ++m) cv.cases.push_back(cauchy_vandermonde_case(4, m, n, rng));
  }
  report.suites.push_back(std::move(cv));

  SuiteReport ops{"operator-rewrites", {}};
  auto basis = small_basis2(3);
  for (int alpha = -1; alpha <= 2; ++alpha)
    for (int beta = -1; beta <= 2; ++beta)
      for (int j = -2; j <= 1; ++j) ops.cases.push_back(field_twist_case(alpha, beta, j, basis));
  for (int k = 0; k <= 3; ++k)
    for (int b = 0; b <= 1; ++b) ops.cases.push_back(translation_rewrite_case(k, b, basis));
  report.suites.push_back(std::move(ops));

  return report;
}

}  // namespace looptau::fock
