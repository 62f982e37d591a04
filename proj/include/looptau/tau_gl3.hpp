#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "looptau/det.hpp"
#include "looptau/loopgroup.hpp"
#include "looptau/matrix.hpp"
#include "looptau/ratfunc.hpp"
#include "looptau/shifts.hpp"
#include "looptau/tau_gl2.hpp"
#include "looptau/window.hpp"

namespace looptau {

namespace detail {

inline int parity_sign(int k) { return k % 2 == 0 ? 1 : -1; }

inline Poly window_var(char family, int index, const Window& w) {
  return w.contains(index) ? Poly::var(family, index) : Poly();
}

// Exponent vectors for the residue extraction: the x block, then y, then z.
// Coefficients stay rational; variables enter only at the final pairing.
using ExpVec = std::vector<int>;
using LaurentMap = std::map<ExpVec, Rational>;

inline void laurent_add(LaurentMap& m, ExpVec key, const Rational& c) {
  if (c == 0) return;
  auto it = m.find(key);
  if (it == m.end()) {
    m.emplace(std::move(key), c);
  } else {
    it->second += c;
    if (it->second == 0) m.erase(it);
  }
}

// Multiply by (v_a - v_b).
inline LaurentMap laurent_binomial(const LaurentMap& in, size_t a, size_t b) {
  LaurentMap out;
  for (const auto& [ev, c] : in) {
    ExpVec up = ev;
    ++up[a];
    laurent_add(out, std::move(up), c);
    ExpVec dn = ev;
    ++dn[b];
    laurent_add(out, std::move(dn), -c);
  }
  return out;
}

}  // namespace detail

// Expansion depth at which the geometric series of every mixed denominator
// factor has stabilized for the given window.
inline int residue_order(int n_c, int n_d, int n_e, const Window& w) {
  return (w.hi - w.lo) + n_c + n_d + n_e + 2;
}

// One weight-(n_c, n_d, n_e) summand of the triple tau function: the residue
// of the three generating series against the interaction kernel
//
//   prod (x_i-x_j)^2 (y_i-y_j)^2 (z_i-z_j)^2 prod (x_i-y_j) prod (y_i-z_j)
//     / prod (x_i-z_j)
//
// with each 1/(x-z) expanded as sum_m z^m x^{-m-1}. The residue pairs x^t
// with c_{t+alpha-beta}, y^u with d_{u+alpha}, z^v with e_{v+beta}; indices
// outside the window are zero. The result carries the sign
// (-1)^{n_d(n_d+1)/2} and the 1/(n_c! n_d! n_e!) normalization.
inline Poly residue_coeff(int n_c, int n_d, int n_e, int alpha, int beta, const Window& w,
                          int order = -1, bool symmetrize = true) {
  if (n_c < 0 || n_d < 0 || n_e < 0) throw std::invalid_argument("negative residue weight");
  if (order < 0) order = residue_order(n_c, n_d, n_e, w);
  const size_t nx = n_c, ny = n_d, nz = n_e;
  const int lo_c = w.lo - (alpha - beta), hi_c = w.hi - (alpha - beta);
  const int lo_d = w.lo - alpha, hi_d = w.hi - alpha;
  const int lo_e = w.lo - beta, hi_e = w.hi - beta;

  detail::LaurentMap cur;
  cur[detail::ExpVec(nx + ny + nz, 0)] = Rational(1);

  for (size_t i = 0; i < nx; ++i)
    for (size_t j = i + 1; j < nx; ++j) {
      cur = detail::laurent_binomial(cur, i, j);
      cur = detail::laurent_binomial(cur, i, j);
    }
  for (size_t i = 0; i < ny; ++i)
    for (size_t j = i + 1; j < ny; ++j) {
      cur = detail::laurent_binomial(cur, nx + i, nx + j);
      cur = detail::laurent_binomial(cur, nx + i, nx + j);
    }
  for (size_t i = 0; i < nz; ++i)
    for (size_t j = i + 1; j < nz; ++j) {
      cur = detail::laurent_binomial(cur, nx + ny + i, nx + ny + j);
      cur = detail::laurent_binomial(cur, nx + ny + i, nx + ny + j);
    }
  for (size_t i = 0; i < nx; ++i)
    for (size_t j = 0; j < ny; ++j) cur = detail::laurent_binomial(cur, i, nx + j);
  for (size_t i = 0; i < ny; ++i)
    for (size_t j = 0; j < nz; ++j) cur = detail::laurent_binomial(cur, nx + i, nx + ny + j);

  // The y exponents are final here; each x exponent still drops by at least
  // one per remaining mixed factor, each z exponent only grows.
  {
    detail::LaurentMap pruned;
    for (const auto& [ev, c] : cur) {
      bool keep = true;
      for (size_t s = 0; keep && s < nx; ++s)
        if (ev[s] - static_cast<int>(nz) < lo_c || (nz == 0 && ev[s] > hi_c)) keep = false;
      for (size_t s = 0; keep && s < ny; ++s)
        if (ev[nx + s] < lo_d || ev[nx + s] > hi_d) keep = false;
      for (size_t s = 0; keep && s < nz; ++s)
        if (ev[nx + ny + s] > hi_e || (nx == 0 && ev[nx + ny + s] < lo_e)) keep = false;
      if (keep) pruned.emplace(ev, c);
    }
    cur = std::move(pruned);
  }

  // The remaining factors and the final pairing are invariant under
  // permutations within each block, so block-sorted monomials can be merged.
  if (symmetrize) {
    detail::LaurentMap merged;
    for (const auto& [ev, c] : cur) {
      detail::ExpVec key = ev;
      std::sort(key.begin(), key.begin() + nx);
      std::sort(key.begin() + nx, key.begin() + nx + ny);
      std::sort(key.begin() + nx + ny, key.end());
      detail::laurent_add(merged, std::move(key), c);
    }
    cur = std::move(merged);
  }

  for (size_t i = 0; i < nx; ++i)
    for (size_t j = 0; j < nz; ++j) {
      const int rem_x = static_cast<int>(nz - 1 - j);
      const int rem_z = static_cast<int>(nx - 1 - i);
      detail::LaurentMap next;
      for (const auto& [ev, c] : cur) {
        const int cx = ev[i], cz = ev[nx + ny + j];
        int m_lo = 0;
        if (rem_x == 0) m_lo = std::max(m_lo, cx - 1 - hi_c);
        if (rem_z == 0) m_lo = std::max(m_lo, lo_e - cz);
        const int m_hi = std::min({order, cx - 1 - lo_c - rem_x, hi_e - cz});
        for (int m = m_lo; m <= m_hi; ++m) {
          detail::ExpVec ev2 = ev;
          ev2[i] = cx - m - 1;
          ev2[nx + ny + j] = cz + m;
          detail::laurent_add(next, std::move(ev2), c);
        }
      }
      cur = std::move(next);
    }

  Poly out;
  for (const auto& [ev, c] : cur) {
    Monomial mon;
    bool dead = false;
    for (size_t s = 0; !dead && s < nx; ++s) {
      int idx = ev[s] + (alpha - beta);
      if (w.contains(idx))
        mon = mon * Monomial::var(VarId{'c', idx});
      else
        dead = true;
    }
    for (size_t s = 0; !dead && s < ny; ++s) {
      int idx = ev[nx + s] + alpha;
      if (w.contains(idx))
        mon = mon * Monomial::var(VarId{'d', idx});
      else
        dead = true;
    }
    for (size_t s = 0; !dead && s < nz; ++s) {
      int idx = ev[nx + ny + s] + beta;
      if (w.contains(idx))
        mon = mon * Monomial::var(VarId{'e', idx});
      else
        dead = true;
    }
    if (!dead) out.add_term(mon, c);
  }

  Rational norm(1);
  for (int n : {n_c, n_d, n_e})
    for (int i = 2; i <= n; ++i) norm *= Rational(i);
  Rational pref = Rational(1) / norm;
  if ((n_d * (n_d + 1) / 2) % 2 != 0) pref = -pref;
  out.scale(pref);
  return out;
}

// Memoized tau_{k,l}^{(alpha,beta)} over one window: the sum of all residue
// summands with n_c + n_d = k and n_d + n_e = l. Zero when k < 0 or l < 0.
class TauTable3 {
 public:
  explicit TauTable3(Window window) : window_(window) {}

  const Window& window() const { return window_; }

  const Poly& tau(int k, int l, int alpha, int beta) const {
    std::array<int, 4> key{k, l, alpha, beta};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(k, l, alpha, beta)).first->second;
  }

 private:
  Poly compute(int k, int l, int alpha, int beta) const {
    if (k < 0 || l < 0) return Poly();
    Poly sum;
    for (int n_d = 0; n_d <= std::min(k, l); ++n_d)
      sum += residue_coeff(k - n_d, n_d, l - n_d, alpha, beta, window_);
    return sum;
  }

  Window window_;
  mutable std::map<std::array<int, 4>, Poly> cache_;
};

inline Poly tau3(int k, int l, int alpha, int beta, const Window& window) {
  return TauTable3(window).tau(k, l, alpha, beta);
}

// k x k Hankel determinant in one variable family, entries window-clipped.
inline Poly hankel_tau(char family, int gamma, int k, const Window& w) {
  if (k < 0) return Poly();
  if (k == 0) return Poly(1);
  PolyMatrix m(k, std::vector<Poly>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i][j] = detail::window_var(family, gamma + i + j, w);
  return det_fraction_free(m);
}

// -d_a + sum_{i>=0} e_{b+i} c_{a-b-i-1}
inline Poly closed_tau11(int alpha, int beta, const Window& w) {
  Poly out = -detail::window_var('d', alpha, w);
  for (int i = std::max(0, w.lo - beta); beta + i <= w.hi; ++i)
    out += detail::window_var('e', beta + i, w) * detail::window_var('c', alpha - beta - i - 1, w);
  return out;
}

// e_b sum_{i>=1} e_{b+i+1} c_{a-b-i-1} - e_{b+1} sum_{i>=0} e_{b+i+1} c_{a-b-i-2}
//   + e_{b+1} d_a - e_b d_{a+1}
inline Poly closed_tau12(int alpha, int beta, const Window& w) {
  Poly out;
  for (int i = 1; beta + i + 1 <= w.hi; ++i)
    out += detail::window_var('e', beta, w) * detail::window_var('e', beta + i + 1, w) *
           detail::window_var('c', alpha - beta - i - 1, w);
  for (int i = 0; beta + i + 1 <= w.hi; ++i)
    out -= detail::window_var('e', beta + 1, w) * detail::window_var('e', beta + i + 1, w) *
           detail::window_var('c', alpha - beta - i - 2, w);
  out += detail::window_var('e', beta + 1, w) * detail::window_var('d', alpha, w);
  out -= detail::window_var('e', beta, w) * detail::window_var('d', alpha + 1, w);
  return out;
}

// c_{a-b+1} sum_{i>=0} e_{b+i} c_{a-b-i-1} - c_{a-b} sum_{i>=0} e_{b+i} c_{a-b-i}
//   + c_{a-b} d_{a+1} - c_{a-b+1} d_a
inline Poly closed_tau21(int alpha, int beta, const Window& w) {
  Poly out;
  for (int i = 0; beta + i <= w.hi; ++i)
    out += detail::window_var('c', alpha - beta + 1, w) * detail::window_var('e', beta + i, w) *
           detail::window_var('c', alpha - beta - i - 1, w);
  for (int i = 0; beta + i <= w.hi; ++i)
    out -= detail::window_var('c', alpha - beta, w) * detail::window_var('e', beta + i, w) *
           detail::window_var('c', alpha - beta - i, w);
  out += detail::window_var('c', alpha - beta, w) * detail::window_var('d', alpha + 1, w);
  out -= detail::window_var('c', alpha - beta + 1, w) * detail::window_var('d', alpha, w);
  return out;
}

// tau_{k,l-1} tau_{k,l}^(a+1) + tau_{k+1,l} tau_{k-1,l-1}^(a+1)
//   - tau_{k,l-1}^(a+1) tau_{k,l}
inline Poly three_term_alpha_residual(int k, int l, int alpha, int beta, const TauTable3& t) {
  return t.tau(k, l - 1, alpha, beta) * t.tau(k, l, alpha + 1, beta) +
         t.tau(k + 1, l, alpha, beta) * t.tau(k - 1, l - 1, alpha + 1, beta) -
         t.tau(k, l - 1, alpha + 1, beta) * t.tau(k, l, alpha, beta);
}

// tau_{k+1,l+1}^(b+1) tau_{k,l} - tau_{k+1,l+1} tau_{k,l}^(b+1)
//   + tau_{k+1,l}^(b+1) tau_{k,l+1}
inline Poly three_term_beta_residual(int k, int l, int alpha, int beta, const TauTable3& t) {
  return t.tau(k + 1, l + 1, alpha, beta + 1) * t.tau(k, l, alpha, beta) -
         t.tau(k + 1, l + 1, alpha, beta) * t.tau(k, l, alpha, beta + 1) +
         t.tau(k + 1, l, alpha, beta + 1) * t.tau(k, l + 1, alpha, beta);
}

// (tau_{k,l})^2 - tau_{k,l}^(a+1) tau_{k,l}^(a-1) - tau_{k+1,l+1}^(a-1) tau_{k-1,l-1}^(a+1)
//   + tau_{k+1,l}^(a-1) tau_{k-1,l}^(a+1)
inline Poly qsystem3_alpha_residual(int k, int l, int alpha, int beta, const TauTable3& t) {
  return t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta) -
         t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha - 1, beta) -
         t.tau(k + 1, l + 1, alpha - 1, beta) * t.tau(k - 1, l - 1, alpha + 1, beta) +
         t.tau(k + 1, l, alpha - 1, beta) * t.tau(k - 1, l, alpha + 1, beta);
}

// (tau_{k,l})^2 - tau_{k,l}^(b+1) tau_{k,l}^(b-1) + tau_{k,l+1}^(b-1) tau_{k,l-1}^(b+1)
//   + tau_{k-1,l}^(b-1) tau_{k+1,l}^(b+1)
inline Poly qsystem3_beta_residual(int k, int l, int alpha, int beta, const TauTable3& t) {
  return t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta) -
         t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta - 1) +
         t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l - 1, alpha, beta + 1) +
         t.tau(k - 1, l, alpha, beta - 1) * t.tau(k + 1, l, alpha, beta + 1);
}

// Mixed four-factor identity along the alpha direction.
inline Poly quartic_relation_residual_k(int k, int l, int alpha, int beta, const TauTable3& t) {
  Poly sq_kl = t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta);
  Poly sq_k1 = t.tau(k + 1, l, alpha, beta) * t.tau(k + 1, l, alpha, beta);
  return t.tau(k + 1, l + 1, alpha, beta) * t.tau(k + 1, l, alpha - 1, beta) *
             t.tau(k + 1, l, alpha, beta) * t.tau(k - 1, l - 1, alpha + 1, beta) -
         t.tau(k + 2, l + 1, alpha - 1, beta) * t.tau(k, l - 1, alpha, beta) *
             t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha, beta) +
         (t.tau(k + 2, l, alpha - 1, beta) * t.tau(k, l, alpha + 1, beta) -
          t.tau(k + 1, l, alpha + 1, beta) * t.tau(k + 1, l, alpha - 1, beta)) *
             sq_kl -
         (t.tau(k + 1, l, alpha - 1, beta) * t.tau(k - 1, l, alpha + 1, beta) -
          t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha - 1, beta)) *
             sq_k1;
}

// Mixed four-factor identity along the beta direction.
inline Poly quartic_relation_residual_l(int k, int l, int alpha, int beta, const TauTable3& t) {
  Poly sq_kl = t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta);
  Poly sq_l1 = t.tau(k, l + 1, alpha, beta) * t.tau(k, l + 1, alpha, beta);
  return t.tau(k + 1, l, alpha, beta + 1) * t.tau(k - 1, l, alpha, beta) *
             t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l + 1, alpha, beta) -
         t.tau(k + 1, l + 1, alpha, beta) * t.tau(k - 1, l + 1, alpha, beta - 1) *
             t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta) +
         (t.tau(k, l + 1, alpha, beta + 1) * t.tau(k, l + 1, alpha, beta - 1) -
          t.tau(k, l + 2, alpha, beta - 1) * t.tau(k, l, alpha, beta + 1)) *
             sq_kl +
         (t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l - 1, alpha, beta + 1) -
          t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta - 1)) *
             sq_l1;
}

// Square-weighted rearrangement along the alpha direction: both sides of the
// step identity collected against (tau_{k,l})^2 and (tau_{k+1,l})^2.
inline Poly rearranged_relation_residual_k(int k, int l, int alpha, int beta,
                                           const TauTable3& t) {
  Poly lhs = t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta) *
             (t.tau(k + 2, l, alpha - 1, beta) * t.tau(k, l, alpha + 1, beta) -
              t.tau(k + 1, l, alpha + 1, beta) * t.tau(k + 1, l, alpha - 1, beta) -
              t.tau(k + 2, l + 1, alpha - 1, beta) * t.tau(k, l - 1, alpha + 1, beta));
  Poly rhs = t.tau(k + 1, l, alpha, beta) * t.tau(k + 1, l, alpha, beta) *
             (t.tau(k + 1, l, alpha - 1, beta) * t.tau(k - 1, l, alpha + 1, beta) -
              t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha - 1, beta) -
              t.tau(k + 1, l + 1, alpha - 1, beta) * t.tau(k - 1, l - 1, alpha + 1, beta));
  return lhs - rhs;
}

// Square-weighted rearrangement along the beta direction.
inline Poly rearranged_relation_residual_l(int k, int l, int alpha, int beta,
                                           const TauTable3& t) {
  Poly lhs = t.tau(k, l, alpha, beta) * t.tau(k, l, alpha, beta) *
             (t.tau(k, l + 1, alpha, beta + 1) * t.tau(k, l + 1, alpha, beta - 1) -
              t.tau(k, l + 2, alpha, beta - 1) * t.tau(k, l, alpha, beta + 1) -
              t.tau(k - 1, l + 1, alpha, beta - 1) * t.tau(k + 1, l + 1, alpha, beta + 1));
  Poly rhs = t.tau(k, l + 1, alpha, beta) * t.tau(k, l + 1, alpha, beta) *
             (t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta - 1) -
              t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l - 1, alpha, beta + 1) -
              t.tau(k - 1, l, alpha, beta - 1) * t.tau(k + 1, l, alpha, beta + 1));
  return lhs - rhs;
}

// Entries of the k-direction curvature equation written through tau ratios
// and cleared of denominators. Defined for (row, col) in {(0,0), (0,2), (2,0)}.
inline Poly curvature_component_residual_k(int row, int col, int k, int l, int alpha, int beta,
                                           const TauTable3& t) {
  if (row == 0 && col == 2)
    return t.tau(k, l - 1, alpha, beta) * t.tau(k, l, alpha + 1, beta) +
           t.tau(k - 1, l - 1, alpha + 1, beta) * t.tau(k + 1, l, alpha, beta) -
           t.tau(k, l - 1, alpha + 1, beta) * t.tau(k, l, alpha, beta);
  if (row == 2 && col == 0)
    return t.tau(k + 2, l + 1, alpha - 1, beta) * t.tau(k, l, alpha, beta) +
           t.tau(k + 1, l + 1, alpha, beta) * t.tau(k + 1, l, alpha - 1, beta) -
           t.tau(k + 1, l + 1, alpha - 1, beta) * t.tau(k + 1, l, alpha, beta);
  if (row == 0 && col == 0)
    return -t.tau(k + 2, l + 1, alpha - 1, beta) * t.tau(k, l - 1, alpha, beta) *
               t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha, beta) +
           t.tau(k + 1, l + 1, alpha, beta) * t.tau(k - 1, l - 1, alpha + 1, beta) *
               t.tau(k + 1, l, alpha - 1, beta) * t.tau(k + 1, l, alpha, beta) -
           t.tau(k + 1, l, alpha, beta) * t.tau(k - 1, l, alpha + 1, beta) *
               t.tau(k + 1, l, alpha - 1, beta) * t.tau(k + 1, l, alpha, beta) +
           t.tau(k + 1, l, alpha, beta) * t.tau(k, l, alpha - 1, beta) *
               t.tau(k + 1, l, alpha, beta) * t.tau(k, l, alpha + 1, beta) +
           t.tau(k + 2, l, alpha - 1, beta) * t.tau(k, l, alpha, beta) *
               t.tau(k, l, alpha + 1, beta) * t.tau(k, l, alpha, beta) -
           t.tau(k + 1, l, alpha + 1, beta) * t.tau(k, l, alpha, beta) *
               t.tau(k + 1, l, alpha - 1, beta) * t.tau(k, l, alpha, beta);
  throw std::invalid_argument("curvature component not defined at this entry");
}

// Entries of the l-direction curvature equation, cleared of denominators.
// Defined for (row, col) in {(1,1), (1,0), (0,1)}.
inline Poly curvature_component_residual_l(int row, int col, int k, int l, int alpha, int beta,
                                           const TauTable3& t) {
  if (row == 1 && col == 0)
    return t.tau(k + 1, l + 1, alpha, beta + 1) * t.tau(k, l, alpha, beta) -
           t.tau(k + 1, l + 1, alpha, beta) * t.tau(k, l, alpha, beta + 1) +
           t.tau(k + 1, l, alpha, beta + 1) * t.tau(k, l + 1, alpha, beta);
  if (row == 0 && col == 1)
    return t.tau(k - 1, l, alpha, beta - 1) * t.tau(k, l + 1, alpha, beta) +
           t.tau(k - 1, l + 1, alpha, beta - 1) * t.tau(k, l, alpha, beta) -
           t.tau(k - 1, l, alpha, beta) * t.tau(k, l + 1, alpha, beta - 1);
  if (row == 1 && col == 1)
    return t.tau(k + 1, l + 1, alpha, beta) * t.tau(k - 1, l + 1, alpha, beta - 1) *
               t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta) -
           t.tau(k + 1, l, alpha, beta + 1) * t.tau(k - 1, l, alpha, beta) *
               t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l + 1, alpha, beta) -
           t.tau(k, l + 1, alpha, beta) * t.tau(k, l - 1, alpha, beta + 1) *
               t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l + 1, alpha, beta) +
           t.tau(k, l + 1, alpha, beta) * t.tau(k, l, alpha, beta - 1) *
               t.tau(k, l + 1, alpha, beta) * t.tau(k, l, alpha, beta + 1) +
           t.tau(k, l + 2, alpha, beta - 1) * t.tau(k, l, alpha, beta) *
               t.tau(k, l, alpha, beta + 1) * t.tau(k, l, alpha, beta) -
           t.tau(k, l + 1, alpha, beta + 1) * t.tau(k, l, alpha, beta) *
               t.tau(k, l + 1, alpha, beta - 1) * t.tau(k, l, alpha, beta);
  throw std::invalid_argument("curvature component not defined at this entry");
}

namespace detail {

inline RatFunc tau_ratio3(const TauTable3& t, int kn, int ln, int an, int bn, int kd, int ld,
                          int ad, int bd) {
  const Poly& den = t.tau(kd, ld, ad, bd);
  if (den.is_zero()) throw std::domain_error("tau function vanishes at this point");
  return RatFunc(t.tau(kn, ln, an, bn), den);
}

}  // namespace detail

// tau_{k+1,l} / tau_{k,l}
inline RatFunc h3_k(int k, int l, int alpha, int beta, const TauTable3& t) {
  return detail::tau_ratio3(t, k + 1, l, alpha, beta, k, l, alpha, beta);
}

// tau_{k,l+1} / tau_{k,l}
inline RatFunc h3_l(int k, int l, int alpha, int beta, const TauTable3& t) {
  return detail::tau_ratio3(t, k, l + 1, alpha, beta, k, l, alpha, beta);
}

// tau_{k+1,l+1} / tau_{k,l}
inline RatFunc h3_kl(int k, int l, int alpha, int beta, const TauTable3& t) {
  return detail::tau_ratio3(t, k + 1, l + 1, alpha, beta, k, l, alpha, beta);
}

// The four one-step connection moves: raising alpha or beta in place, or
// trading a unit of k (resp. l) for one of alpha (resp. beta).
enum class Conn3Kind { RaiseAlpha, RaiseBeta, LowerKRaiseAlpha, LowerLRaiseBeta };

// Connection matrix of the requested move at lattice point (k, l, alpha,
// beta). Off-diagonal entries are tau quotients; the z-linear diagonal entry
// is fixed by requiring determinant exactly z.
inline FLoopMatrix connection3(Conn3Kind kind, int k, int l, int alpha, int beta,
                               const TauTable3& t) {
  if (k < 0 || l < 0) throw std::invalid_argument("connection matrix needs k,l >= 0");
  auto r = [&](int kn, int ln, int an, int bn, int kd, int ld, int ad, int bd) {
    return detail::tau_ratio3(t, kn, ln, an, bn, kd, ld, ad, bd);
  };
  const RatFunc one(1);
  const int sk = detail::parity_sign(k);
  FLoopMatrix m(3);
  size_t slot = 0;
  const char* name = "";
  switch (kind) {
    case Conn3Kind::RaiseAlpha:
      slot = 0;
      name = "V_alpha";
      m.at(0, 1) = FSeries(r(k - 1, l, alpha + 1, beta, k, l, alpha + 1, beta));
      m.at(0, 2) = FSeries(r(k - 1, l - 1, alpha + 1, beta, k, l, alpha + 1, beta) * RatFunc(sk));
      m.at(1, 0) = FSeries(-r(k + 1, l, alpha, beta, k, l, alpha, beta));
      m.at(1, 1) = FSeries(one);
      m.at(2, 0) = FSeries(r(k + 1, l + 1, alpha, beta, k, l, alpha, beta) * RatFunc(sk));
      m.at(2, 2) = FSeries(one);
      break;
    case Conn3Kind::RaiseBeta:
      slot = 1;
      name = "V_beta";
      m.at(0, 0) = FSeries(one);
      m.at(0, 1) = FSeries(-r(k - 1, l, alpha, beta, k, l, alpha, beta));
      m.at(1, 0) = FSeries(r(k + 1, l, alpha, beta + 1, k, l, alpha, beta + 1));
      m.at(1, 2) = FSeries(r(k, l - 1, alpha, beta + 1, k, l, alpha, beta + 1) * RatFunc(sk));
      m.at(2, 1) = FSeries(r(k, l + 1, alpha, beta, k, l, alpha, beta) * RatFunc(-sk));
      m.at(2, 2) = FSeries(one);
      break;
    case Conn3Kind::LowerKRaiseAlpha:
      if (k < 1) throw std::invalid_argument("k step-down connection needs k >= 1");
      slot = 1;
      name = "W_k";
      m.at(0, 0) = FSeries(one);
      m.at(0, 1) = FSeries(-r(k - 1, l, alpha, beta, k, l, alpha, beta));
      m.at(1, 0) = FSeries(r(k, l, alpha + 1, beta, k - 1, l, alpha + 1, beta));
      m.at(1, 2) =
          FSeries(r(k - 1, l - 1, alpha + 1, beta, k - 1, l, alpha + 1, beta) * RatFunc(-sk));
      m.at(2, 1) = FSeries(r(k, l + 1, alpha, beta, k, l, alpha, beta) * RatFunc(-sk));
      m.at(2, 2) = FSeries(one);
      break;
    case Conn3Kind::LowerLRaiseBeta:
      if (l < 1) throw std::invalid_argument("l step-down connection needs l >= 1");
      slot = 2;
      name = "W_l";
      m.at(0, 0) = FSeries(one);
      m.at(0, 2) = FSeries(r(k - 1, l - 1, alpha, beta, k, l, alpha, beta) * RatFunc(-sk));
      m.at(1, 1) = FSeries(one);
      m.at(1, 2) = FSeries(r(k, l - 1, alpha, beta, k, l, alpha, beta) * RatFunc(-sk));
      m.at(2, 0) = FSeries(r(k + 1, l, alpha, beta + 1, k, l - 1, alpha, beta + 1) * RatFunc(-sk));
      m.at(2, 1) = FSeries(r(k, l, alpha, beta + 1, k, l - 1, alpha, beta + 1) * RatFunc(sk));
      break;
  }
  m.at(slot, slot) = FSeries::z_pow(1);
  // The complementary minor of the z slot is the identity, so the constant
  // part of the diagonal entry is whatever cancels the rest of det - z.
  FSeries d = m.det() - FSeries::z_pow(1);
  m.at(slot, slot) = detail::linear_in_z(-d.coeff(0));
  detail::check_det(m, FSeries::z_pow(1), name);
  return m;
}

// Advance of k by one, composed from the two elementary moves; unit
// determinant, polynomial in z.
inline FLoopMatrix connection_U_k(int k, int l, int alpha, int beta, const TauTable3& t) {
  FLoopMatrix u = connection3(Conn3Kind::RaiseAlpha, k, l, alpha, beta, t) *
                  connection3(Conn3Kind::LowerKRaiseAlpha, k + 1, l, alpha, beta, t).inverse(0);
  detail::check_det(u, FSeries(RatFunc(1)), "U_k");
  return u;
}

// Advance of l by one.
inline FLoopMatrix connection_U_l(int k, int l, int alpha, int beta, const TauTable3& t) {
  FLoopMatrix u = connection3(Conn3Kind::RaiseBeta, k, l, alpha, beta, t) *
                  connection3(Conn3Kind::LowerLRaiseBeta, k, l + 1, alpha, beta, t).inverse(0);
  detail::check_det(u, FSeries(RatFunc(1)), "U_l");
  return u;
}

struct ZeroCurvature3 {
  FLoopMatrix k_step;
  FLoopMatrix l_step;
};

// Both factorizations of each advance matrix must agree: down-up through the
// starting weights against up-down through the shifted ones.
inline ZeroCurvature3 zero_curvature3_residual(int k, int l, int alpha, int beta,
                                               const TauTable3& t) {
  ZeroCurvature3 r;
  r.k_step =
      connection3(Conn3Kind::RaiseAlpha, k, l, alpha, beta, t) *
          connection3(Conn3Kind::LowerKRaiseAlpha, k + 1, l, alpha, beta, t).inverse(0) -
      connection3(Conn3Kind::LowerKRaiseAlpha, k + 1, l, alpha - 1, beta, t).inverse(0) *
          connection3(Conn3Kind::RaiseAlpha, k + 1, l, alpha - 1, beta, t);
  r.l_step =
      connection3(Conn3Kind::RaiseBeta, k, l, alpha, beta, t) *
          connection3(Conn3Kind::LowerLRaiseBeta, k, l + 1, alpha, beta, t).inverse(0) -
      connection3(Conn3Kind::LowerLRaiseBeta, k, l + 1, alpha, beta - 1, t).inverse(0) *
          connection3(Conn3Kind::RaiseBeta, k, l + 1, alpha, beta - 1, t);
  return r;
}

// Cross-multiplied form of the k-step route equality; avoids any inversion.
inline FLoopMatrix move_relation_residual_k(int k, int l, int alpha, int beta,
                                            const TauTable3& t) {
  return connection3(Conn3Kind::LowerKRaiseAlpha, k + 1, l, alpha - 1, beta, t) *
             connection3(Conn3Kind::RaiseAlpha, k, l, alpha, beta, t) -
         connection3(Conn3Kind::RaiseAlpha, k + 1, l, alpha - 1, beta, t) *
             connection3(Conn3Kind::LowerKRaiseAlpha, k + 1, l, alpha, beta, t);
}

inline FLoopMatrix move_relation_residual_l(int k, int l, int alpha, int beta,
                                            const TauTable3& t) {
  return connection3(Conn3Kind::LowerLRaiseBeta, k, l + 1, alpha, beta - 1, t) *
             connection3(Conn3Kind::RaiseBeta, k, l, alpha, beta, t) -
         connection3(Conn3Kind::RaiseBeta, k, l + 1, alpha, beta - 1, t) *
             connection3(Conn3Kind::LowerLRaiseBeta, k, l + 1, alpha, beta, t);
}

// The tau formula for the negative Birkhoff factor: the tau-coefficient
// matrix with 1/z off-diagonals, each row hit by its pair of shift fields
// (row 0: c+, d+; row 1: c-, e+; row 2: d-, e-), divided by tau_{k,l}.
inline FLoopMatrix g_minus_from_tau3(int k, int l, int alpha, int beta, const TauTable3& t,
                                     int N) {
  if (k < 0 || l < 0) throw std::invalid_argument("negative Birkhoff factor needs k,l >= 0");
  const Poly& tau_kl = t.tau(k, l, alpha, beta);
  if (tau_kl.is_zero()) throw std::domain_error("tau function vanishes at this point");
  const Window& w = t.window();
  // Shift fields raise indices, so a tau term just left of the window can be
  // carried back inside. The numerators are therefore evaluated on a window
  // extended to the left by the expansion depth and restricted afterwards.
  const Window wide(w.lo - (N + 2), w.hi);
  TauTable3 tw(wide);
  const std::vector<std::vector<ShiftSpec>> row_fields = {
      {ShiftSpec{'c', +1, 0, wide}, ShiftSpec{'d', +1, 0, wide}},
      {ShiftSpec{'c', -1, N, wide}, ShiftSpec{'e', +1, 0, wide}},
      {ShiftSpec{'d', -1, N, wide}, ShiftSpec{'e', -1, N, wide}}};
  const int sk = detail::parity_sign(k);
  auto entry = [&](size_t row, int kk, int ll, int sign, int zshift) {
    Poly p = tw.tau(kk, ll, alpha, beta);
    if (sign < 0) p = -p;
    PSeries img = clip_to_window(compose_fields(p, row_fields[row]), w);
    return detail::poly_series_over_tau(img.shifted(zshift), tau_kl);
  };
  FLoopMatrix m(3);
  m.at(0, 0) = entry(0, k, l, +1, 0);
  m.at(0, 1) = entry(0, k - 1, l, +1, -1);
  m.at(0, 2) = entry(0, k - 1, l - 1, sk, -1);
  m.at(1, 0) = entry(1, k + 1, l, +1, -1);
  m.at(1, 1) = entry(1, k, l, +1, 0);
  m.at(1, 2) = entry(1, k, l - 1, sk, -1);
  m.at(2, 0) = entry(2, k + 1, l + 1, -sk, -1);
  m.at(2, 1) = entry(2, k, l + 1, sk, -1);
  m.at(2, 2) = entry(2, k, l, +1, 0);
  return m;
}

// Symbolic check that g_minus^-1 g^{[k,l](alpha,beta)} has no negative powers.
inline BirkhoffCheck verify_birkhoff3(int k, int l, int alpha, int beta, const Window& window,
                                      int N) {
  TauTable3 t(window);
  int pad = N + std::max(k, 0) + std::max(l, 0) + 3;
  FLoopMatrix gm = g_minus_from_tau3(k, l, alpha, beta, t, pad);
  FLoopMatrix g = map_entries<RatFunc>(build_g(GroupSpec{3, window, alpha, beta, k, l}),
                                       [](const Poly& p) { return RatFunc(p); });
  FLoopMatrix rest = gm.inverse(pad - 2) * g;
  auto witness = negative_part_witness_to(rest, N);
  if (!witness) return BirkhoffCheck{true, ""};
  std::ostringstream os;
  os << "entry (" << witness->row << "," << witness->col << ") at z^" << witness->exponent
     << ": " << RingTraits<RatFunc>::str(witness->coeff);
  return BirkhoffCheck{false, os.str()};
}

// Baker matrix Psi = T1^k T2^l Q0^-alpha Q1^-beta g_minus.
inline FLoopMatrix baker3(int k, int l, int alpha, int beta, const TauTable3& t, int N) {
  FLoopMatrix gm = g_minus_from_tau3(k, l, alpha, beta, t, N);
  auto lift = [](const PLoopMatrix& m) {
    return map_entries<RatFunc>(m, [](const Poly& p) { return RatFunc(p); });
  };
  return lift(build_T_power(3, 1, k)) *
         (lift(build_T_power(3, 2, l)) *
          (lift(build_Q_power(3, 0, -alpha)) * (lift(build_Q_power(3, 1, -beta)) * gm)));
}

struct BakerResiduals3 {
  FLoopMatrix u_k;      // Psi^{[k+1,l]} - Psi U_k
  FLoopMatrix u_l;      // Psi^{[k,l+1]} - Psi U_l
  FLoopMatrix v_alpha;  // Psi^{(a+1,b)} - Psi V_alpha
  FLoopMatrix v_beta;   // Psi^{(a,b+1)} - Psi V_beta
  FLoopMatrix w_alpha;  // Psi^{[k-1,l](a+1,b)} - Psi W_k (k >= 1)
  FLoopMatrix w_beta;   // Psi^{[k,l-1](a,b+1)} - Psi W_l (l >= 1)
};

inline BakerResiduals3 baker_relations_residual3(int k, int l, int alpha, int beta,
                                                 const TauTable3& t, int N) {
  FLoopMatrix psi = baker3(k, l, alpha, beta, t, N);
  BakerResiduals3 r;
  r.u_k = baker3(k + 1, l, alpha, beta, t, N) - psi * connection_U_k(k, l, alpha, beta, t);
  r.u_l = baker3(k, l + 1, alpha, beta, t, N) - psi * connection_U_l(k, l, alpha, beta, t);
  r.v_alpha = baker3(k, l, alpha + 1, beta, t, N) -
              psi * connection3(Conn3Kind::RaiseAlpha, k, l, alpha, beta, t);
  r.v_beta = baker3(k, l, alpha, beta + 1, t, N) -
             psi * connection3(Conn3Kind::RaiseBeta, k, l, alpha, beta, t);
  if (k >= 1)
    r.w_alpha = baker3(k - 1, l, alpha + 1, beta, t, N) -
                psi * connection3(Conn3Kind::LowerKRaiseAlpha, k, l, alpha, beta, t);
  if (l >= 1)
    r.w_beta = baker3(k, l - 1, alpha, beta + 1, t, N) -
               psi * connection3(Conn3Kind::LowerLRaiseBeta, k, l, alpha, beta, t);
  return r;
}

// Connection between two arbitrary lattice points in one step: the diagonal
// translation between the negative factors is fixed by the index changes,
// with exponents x0 = k-k'+a-a', x1 = k'-k+l-l'+b-b', x2 = l'-l.
inline FLoopMatrix connection_path3(int k, int l, int alpha, int beta, int k2, int l2,
                                    int alpha2, int beta2, const TauTable3& t, int N) {
  int x0 = k - k2 + alpha - alpha2;
  int x1 = k2 - k + l - l2 + beta - beta2;
  int x2 = l2 - l;
  FLoopMatrix gm = g_minus_from_tau3(k, l, alpha, beta, t, N);
  FLoopMatrix gm2 = g_minus_from_tau3(k2, l2, alpha2, beta2, t, N);
  auto lift = [](const PLoopMatrix& m) {
    return map_entries<RatFunc>(m, [](const Poly& p) { return RatFunc(p); });
  };
  FLoopMatrix q = lift(build_Q_power(3, 0, x0)) *
                  (lift(build_Q_power(3, 1, x1)) * lift(build_Q_power(3, 2, x2)));
  return gm.inverse(N - 2) * (q * gm2);
}

// CSV export: header then one row per point of the requested box.
inline std::string tau_table3_csv(const TauTable3& t, int k_min, int k_max, int l_min, int l_max,
                                  int alpha_min, int alpha_max, int beta_min, int beta_max) {
  std::ostringstream os;
  os << "k,l,alpha,beta,tau\n";
  for (int k = k_min; k <= k_max; ++k)
    for (int l = l_min; l <= l_max; ++l)
      for (int alpha = alpha_min; alpha <= alpha_max; ++alpha)
        for (int beta = beta_min; beta <= beta_max; ++beta)
          os << k << "," << l << "," << alpha << "," << beta << ",\""
             << t.tau(k, l, alpha, beta).str() << "\"\n";
  return os.str();
}

}  // namespace looptau
