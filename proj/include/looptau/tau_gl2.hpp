#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "looptau/det.hpp"
#include "looptau/loopgroup.hpp"
#include "looptau/matrix.hpp"
#include "looptau/ratfunc.hpp"
#include "looptau/shifts.hpp"
#include "looptau/window.hpp"

namespace looptau {

// Memoized Hankel determinants tau_k^(alpha) over one window.
class TauTable2 {
 public:
  explicit TauTable2(Window window) : window_(window) {}

  const Window& window() const { return window_; }

  const Poly& tau(int k, int alpha) const {
    if (k < -1) throw std::invalid_argument("tau index below -1");
    auto key = std::make_pair(k, alpha);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, compute(k, alpha)).first->second;
  }

 private:
  Poly compute(int k, int alpha) const {
    if (k == -1) return Poly();
    if (k == 0) return Poly(1);
    PolyMatrix m(k, std::vector<Poly>(k));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        int idx = alpha + i + j;
        m[i][j] = window_.contains(idx) ? Poly::var('c', idx) : Poly();
      }
    return det_fraction_free(m);
  }

  Window window_;
  mutable std::map<std::pair<int, int>, Poly> cache_;
};

inline Poly tau2(int k, int alpha, const Window& window) {
  return TauTable2(window).tau(k, alpha);
}

// (tau_k)^2 - tau_k^(a-1) tau_k^(a+1) + tau_{k+1}^(a-1) tau_{k-1}^(a+1)
inline Poly qsystem_residual(int k, int alpha, const TauTable2& t) {
  return t.tau(k, alpha) * t.tau(k, alpha) - t.tau(k, alpha - 1) * t.tau(k, alpha + 1) +
         t.tau(k + 1, alpha - 1) * t.tau(k - 1, alpha + 1);
}

// tau_k^(a) tau_{k-2}^(a+2) - tau_{k-1}^(a+2) tau_{k-1}^(a) + (tau_{k-1}^(a+1))^2
inline Poly desnanot_jacobi_residual(int k, int alpha, const TauTable2& t) {
  if (k < 2) throw std::invalid_argument("determinant identity needs k >= 2");
  return t.tau(k, alpha) * t.tau(k - 2, alpha + 2) - t.tau(k - 1, alpha + 2) * t.tau(k - 1, alpha) +
         t.tau(k - 1, alpha + 1) * t.tau(k - 1, alpha + 1);
}

namespace detail {

inline RatFunc tau_ratio(const TauTable2& t, int knum, int anum, int kden, int aden) {
  const Poly& den = t.tau(kden, aden);
  if (den.is_zero()) throw std::domain_error("tau function vanishes at this point");
  return RatFunc(t.tau(knum, anum), den);
}

}  // namespace detail

// h_k = tau_{k+1}/tau_k and the derived lattice quantities.
inline RatFunc h_quantity(int k, int alpha, const TauTable2& t) {
  return detail::tau_ratio(t, k + 1, alpha, k, alpha);
}

// alpha_k = h_{k+1}^(a) / h_k^(a+1), with alpha_{-1} = 0.
inline RatFunc alpha_quantity(int k, int alpha, const TauTable2& t) {
  if (k == -1) return RatFunc();
  return h_quantity(k + 1, alpha, t) / h_quantity(k, alpha + 1, t);
}

// beta_k = h_k^(a+1) / h_k^(a)
inline RatFunc beta_quantity(int k, int alpha, const TauTable2& t) {
  return h_quantity(k, alpha + 1, t) / h_quantity(k, alpha, t);
}

// b_k = alpha_{k-1} + beta_k, equal to alpha_k^(a-1) + beta_k^(a-1).
inline RatFunc b_quantity(int k, int alpha, const TauTable2& t) {
  return alpha_quantity(k - 1, alpha, t) + beta_quantity(k, alpha, t);
}

struct HQuantities {
  RatFunc h;
  RatFunc alpha_k;
  RatFunc beta_k;
  RatFunc b;
};

inline HQuantities h_quantities(int k, int alpha, const TauTable2& t) {
  return HQuantities{h_quantity(k, alpha, t), alpha_quantity(k, alpha, t),
                     beta_quantity(k, alpha, t), b_quantity(k, alpha, t)};
}

namespace detail {

inline FSeries linear_in_z(const RatFunc& constant_term) {
  FSeries s = FSeries::z_pow(1);
  s.set_coeff(0, constant_term);
  return s;
}

inline void check_det(const FLoopMatrix& m, const FSeries& expect, const char* name) {
  FSeries diff = m.det() - expect;
  if (!diff.is_exact_zero())
    throw std::logic_error(std::string("connection matrix determinant check failed: ") + name);
}

}  // namespace detail

struct ConnectionMatrices2 {
  FLoopMatrix U;
  FLoopMatrix V;
  FLoopMatrix W;  // only for k >= 1
};

// U_k = [[z - b_k, 1/h_k], [-h_k, 0]]
inline FLoopMatrix connection_U(int k, int alpha, const TauTable2& t) {
  RatFunc h = h_quantity(k, alpha, t);
  FLoopMatrix m(2);
  m.at(0, 0) = detail::linear_in_z(-b_quantity(k, alpha, t));
  m.at(0, 1) = FSeries(h.reciprocal());
  m.at(1, 0) = FSeries(-h);
  detail::check_det(m, FSeries(RatFunc(1)), "U");
  return m;
}

// V_k = [[z - alpha_{k-1}, 1/h_{k-1}^(a+1)], [-h_k, 1]]; V_0 uses the
// alpha_{-1} = 1/h_{-1} = 0 boundary convention.
inline FLoopMatrix connection_V(int k, int alpha, const TauTable2& t) {
  FLoopMatrix m(2);
  m.at(0, 0) = detail::linear_in_z(-alpha_quantity(k - 1, alpha, t));
  m.at(0, 1) = k == 0 ? FSeries() : FSeries(h_quantity(k - 1, alpha + 1, t).reciprocal());
  m.at(1, 0) = FSeries(-h_quantity(k, alpha, t));
  m.at(1, 1) = FSeries(RatFunc(1));
  detail::check_det(m, FSeries::z_pow(1), "V");
  return m;
}

// W_k = [[1, -1/h_{k-1}], [h_{k-1}^(a+1), z - beta_{k-1}]], defined for k >= 1.
inline FLoopMatrix connection_W(int k, int alpha, const TauTable2& t) {
  if (k < 1) throw std::invalid_argument("W connection matrix needs k >= 1");
  FLoopMatrix m(2);
  m.at(0, 0) = FSeries(RatFunc(1));
  m.at(0, 1) = FSeries(-h_quantity(k - 1, alpha, t).reciprocal());
  m.at(1, 0) = FSeries(h_quantity(k - 1, alpha + 1, t));
  m.at(1, 1) = detail::linear_in_z(-beta_quantity(k - 1, alpha, t));
  detail::check_det(m, FSeries::z_pow(1), "W");
  return m;
}

inline ConnectionMatrices2 connection_matrices(int k, int alpha, const TauTable2& t) {
  return ConnectionMatrices2{connection_U(k, alpha, t), connection_V(k, alpha, t),
                             k >= 1 ? connection_W(k, alpha, t) : FLoopMatrix()};
}

// V_k (W_{k+1})^-1 - (W_{k+1}^(a-1))^-1 V_{k+1}^(a-1): the triangle relation
// around one lattice plaquette; expected to vanish identically.
inline FLoopMatrix zero_curvature_residual(int k, int alpha, const TauTable2& t) {
  FLoopMatrix left = connection_V(k, alpha, t) * connection_W(k + 1, alpha, t).inverse(0);
  FLoopMatrix right =
      connection_W(k + 1, alpha - 1, t).inverse(0) * connection_V(k + 1, alpha - 1, t);
  return left - right;
}

// h_k/h_{k-1}^(a+1) + h_k^(a+1)/h_k - h_{k+1}^(a-1)/h_k - h_k/h_k^(a-1),
// the scalar form of the b_k double expression.
inline RatFunc h_relation_residual(int k, int alpha, const TauTable2& t) {
  return h_quantity(k, alpha, t) / h_quantity(k - 1, alpha + 1, t) +
         h_quantity(k, alpha + 1, t) / h_quantity(k, alpha, t) -
         h_quantity(k + 1, alpha - 1, t) / h_quantity(k, alpha, t) -
         h_quantity(k, alpha, t) / h_quantity(k, alpha - 1, t);
}

// (tau_k)^2 (tau_{k+2}^(a-1) tau_k^(a+1) - tau_{k+1}^(a-1) tau_{k+1}^(a+1))
//   - (tau_{k+1})^2 (tau_{k+1}^(a-1) tau_{k-1}^(a+1) - tau_k^(a-1) tau_k^(a+1))
inline Poly rearranged_relation_residual(int k, int alpha, const TauTable2& t) {
  Poly lhs = t.tau(k, alpha) * t.tau(k, alpha) *
             (t.tau(k + 2, alpha - 1) * t.tau(k, alpha + 1) -
              t.tau(k + 1, alpha - 1) * t.tau(k + 1, alpha + 1));
  Poly rhs = t.tau(k + 1, alpha) * t.tau(k + 1, alpha) *
             (t.tau(k + 1, alpha - 1) * t.tau(k - 1, alpha + 1) -
              t.tau(k, alpha - 1) * t.tau(k, alpha + 1));
  return lhs - rhs;
}

namespace detail {

inline FSeries poly_series_over_tau(const PSeries& s, const Poly& tau) {
  FSeries out = FSeries::with_trunc(s.trunc());
  RatFunc inv_tau(Poly(1), tau);
  for (const auto& [e, p] : s.terms()) out.set_coeff(e, RatFunc(p) * inv_tau);
  return out;
}

}  // namespace detail

// The tau formula for the negative Birkhoff factor:
// [[S+ tau_k, S+ tau_{k-1}/z], [S- tau_{k+1}/z, S- tau_k]] / tau_k.
inline FLoopMatrix g_minus_from_tau(int k, int alpha, const TauTable2& t, int N) {
  if (k < 0) throw std::invalid_argument("negative Birkhoff factor needs k >= 0");
  const Poly& tau_k = t.tau(k, alpha);
  if (tau_k.is_zero()) throw std::domain_error("tau function vanishes at this point");
  const Window& w = t.window();
  ShiftSpec plus{'c', +1, 0, w};
  ShiftSpec minus{'c', -1, N, w};
  FLoopMatrix m(2);
  m.at(0, 0) = detail::poly_series_over_tau(shift_field_apply(t.tau(k, alpha), plus), tau_k);
  m.at(0, 1) =
      detail::poly_series_over_tau(shift_field_apply(t.tau(k - 1, alpha), plus).shifted(-1), tau_k);
  m.at(1, 0) = detail::poly_series_over_tau(shift_field_apply(t.tau(k + 1, alpha), minus).shifted(-1),
                                            tau_k);
  m.at(1, 1) = detail::poly_series_over_tau(shift_field_apply(t.tau(k, alpha), minus), tau_k);
  return m;
}

struct BirkhoffCheck {
  bool pass;
  std::string witness;
};

// Symbolic check that g_minus^-1 g^{[k](alpha)} has no negative powers.
inline BirkhoffCheck verify_birkhoff2(int k, int alpha, const Window& window, int N) {
  TauTable2 t(window);
  int pad = N + (k > 0 ? k : 0) + 3;
  FLoopMatrix gm = g_minus_from_tau(k, alpha, t, pad);
  FLoopMatrix g = map_entries<RatFunc>(build_g(GroupSpec{2, window, alpha, 0, k, 0}),
                                       [](const Poly& p) { return RatFunc(p); });
  FLoopMatrix rest = gm.inverse(pad - 2) * g;
  auto witness = negative_part_witness_to(rest, N);
  if (!witness) return BirkhoffCheck{true, ""};
  std::ostringstream os;
  os << "entry (" << witness->row << "," << witness->col << ") at z^" << witness->exponent
     << ": " << RingTraits<RatFunc>::str(witness->coeff);
  return BirkhoffCheck{false, os.str()};
}

// Baker function Psi = T^k Q_0^{-alpha} g_minus.
inline FLoopMatrix baker2(int k, int alpha, const TauTable2& t, int N) {
  FLoopMatrix gm = g_minus_from_tau(k, alpha, t, N);
  auto lift = [](const PLoopMatrix& m) {
    return map_entries<RatFunc>(m, [](const Poly& p) { return RatFunc(p); });
  };
  return lift(build_T_power(2, 1, k)) * (lift(build_Q_power(2, 0, -alpha)) * gm);
}

struct BakerResiduals2 {
  FLoopMatrix u_step;  // Psi^{[k+1](a)} - Psi^{[k](a)} U_k
  FLoopMatrix v_step;  // Psi^{[k](a+1)} - Psi^{[k](a)} V_k
  FLoopMatrix w_step;  // Psi^{[k-1](a+1)} - Psi^{[k](a)} W_k (k >= 1)
};

inline BakerResiduals2 baker_relations_residual(int k, int alpha, const TauTable2& t, int N) {
  FLoopMatrix psi = baker2(k, alpha, t, N);
  BakerResiduals2 r;
  r.u_step = baker2(k + 1, alpha, t, N) - psi * connection_U(k, alpha, t);
  r.v_step = baker2(k, alpha + 1, t, N) - psi * connection_V(k, alpha, t);
  if (k >= 1) r.w_step = baker2(k - 1, alpha + 1, t, N) - psi * connection_W(k, alpha, t);
  return r;
}

// CSV export: header then one row per (k, alpha) in the requested box.
inline std::string tau_table2_csv(const TauTable2& t, int k_min, int k_max, int alpha_min,
                                  int alpha_max) {
  std::ostringstream os;
  os << "k,alpha,tau\n";
  for (int k = k_min; k <= k_max; ++k)
    for (int alpha = alpha_min; alpha <= alpha_max; ++alpha)
      os << k << "," << alpha << ",\"" << t.tau(k, alpha).str() << "\"\n";
  return os.str();
}

}  // namespace looptau
