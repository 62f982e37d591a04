#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "looptau/matrix.hpp"
#include "looptau/poly.hpp"
#include "looptau/series.hpp"
#include "looptau/window.hpp"

namespace looptau {

// Parameters selecting one group element g^{[k](alpha)} (n = 2) or
// g^{[k,l](alpha,beta)} (n = 3); coefficient variables restricted to window.
struct GroupSpec {
  int n;
  Window window;
  int alpha = 0;
  int beta = 0;
  int k = 0;
  int l = 0;
};

namespace detail {

inline PLoopMatrix diag_z_powers(const std::vector<int>& pows) {
  PLoopMatrix m(pows.size());
  for (size_t i = 0; i < pows.size(); ++i) m.at(i, i) = PSeries::z_pow(pows[i]);
  return m;
}

}  // namespace detail

// Q_a: identity with z^-1 in slot (a,a).
inline PLoopMatrix build_Q(int n, int a) {
  if (n != 2 && n != 3) throw std::invalid_argument("loop group rank must be 2 or 3");
  if (a < 0 || a >= n) throw std::invalid_argument("translation index out of range");
  std::vector<int> pows(n, 0);
  pows[a] = -1;
  return detail::diag_z_powers(pows);
}

inline PLoopMatrix build_Q_power(int n, int a, int p) {
  if (n != 2 && n != 3) throw std::invalid_argument("loop group rank must be 2 or 3");
  if (a < 0 || a >= n) throw std::invalid_argument("translation index out of range");
  std::vector<int> pows(n, 0);
  pows[a] = -p;
  return detail::diag_z_powers(pows);
}

// T = Q_1 Q_0^-1 for n = 2; T_s = Q_s Q_{s-1}^-1 for n = 3.
inline PLoopMatrix build_T(int n, int s) {
  if (n == 2) {
    if (s != 1) throw std::invalid_argument("translation index out of range");
    return detail::diag_z_powers({1, -1});
  }
  if (n != 3) throw std::invalid_argument("loop group rank must be 2 or 3");
  if (s == 1) return detail::diag_z_powers({1, -1, 0});
  if (s == 2) return detail::diag_z_powers({0, 1, -1});
  throw std::invalid_argument("translation index out of range");
}

inline PLoopMatrix build_T_power(int n, int s, int p) {
  if (n == 2) {
    if (s != 1) throw std::invalid_argument("translation index out of range");
    return detail::diag_z_powers({p, -p});
  }
  if (n != 3) throw std::invalid_argument("loop group rank must be 2 or 3");
  if (s == 1) return detail::diag_z_powers({p, -p, 0});
  if (s == 2) return detail::diag_z_powers({0, p, -p});
  throw std::invalid_argument("translation index out of range");
}

// X^{(gamma)}(z) = sum_i x_{i+gamma} z^{-i-1}, window-restricted (exact).
inline PSeries coefficient_series(char family, int gamma, const Window& window) {
  PSeries s;
  for (int idx = window.lo; idx <= window.hi; ++idx) {
    int i = idx - gamma;
    s.set_coeff(-i - 1, Poly::var(family, idx));
  }
  return s;
}

// Unitriangular group element, left-translated along the lattice.
inline PLoopMatrix build_g(const GroupSpec& spec) {
  if (spec.n == 2) {
    PLoopMatrix g = PLoopMatrix::identity(2);
    g.at(1, 0) = coefficient_series('c', spec.alpha, spec.window);
    if (spec.k == 0) return g;
    return build_T_power(2, 1, -spec.k) * g;
  }
  if (spec.n != 3) throw std::invalid_argument("loop group rank must be 2 or 3");
  PLoopMatrix g = PLoopMatrix::identity(3);
  g.at(1, 0) = coefficient_series('c', spec.alpha - spec.beta, spec.window);
  g.at(2, 0) = coefficient_series('d', spec.alpha, spec.window);
  g.at(2, 1) = coefficient_series('e', spec.beta, spec.window);
  if (spec.k == 0 && spec.l == 0) return g;
  return build_T_power(3, 2, -spec.l) * (build_T_power(3, 1, -spec.k) * g);
}

// Negative-power content of z^-m, 1 <= m <= N; matrix must be known that deep.
template <typename R>
std::optional<NegativeWitness<R>> negative_part_witness_to(const LoopMatrix<R>& m, int N) {
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m.size(); ++j) {
      if (m.at(i, j).trunc() < N)
        throw std::invalid_argument("matrix not determined deep enough for negativity check");
      for (const auto& [e, c] : m.at(i, j).terms())
        if (e < 0 && e >= -N) return NegativeWitness<R>{i, j, e, c};
    }
  return std::nullopt;
}

template <typename R>
bool negative_part_vanishes_to(const LoopMatrix<R>& m, int N) {
  return !negative_part_witness_to(m, N).has_value();
}

inline QLoopMatrix substitute(const PLoopMatrix& m, const std::map<VarId, Rational>& point) {
  return map_entries<Rational>(m, [&](const Poly& p) { return p.substitute(point); });
}

namespace detail {

// Unique solution of a dense rational system; both inconsistency and
// underdetermination signal a vanishing tau function at this point.
inline std::vector<Rational> solve_linear_unique(std::vector<std::vector<Rational>> aug,
                                                 size_t unknowns) {
  size_t rows = aug.size();
  std::vector<size_t> pivot_of(unknowns, SIZE_MAX);
  size_t rank = 0;
  for (size_t col = 0; col < unknowns && rank < rows; ++col) {
    size_t p = rank;
    while (p < rows && aug[p][col] == 0) ++p;
    if (p == rows) continue;
    std::swap(aug[rank], aug[p]);
    Rational inv = Rational(1) / aug[rank][col];
    for (size_t j = col; j <= unknowns; ++j) aug[rank][j] *= inv;
    for (size_t r = 0; r < rows; ++r) {
      if (r == rank || aug[r][col] == 0) continue;
      Rational f = aug[r][col];
      for (size_t j = col; j <= unknowns; ++j) aug[r][j] -= f * aug[rank][j];
    }
    pivot_of[col] = rank;
    ++rank;
  }
  for (size_t r = rank; r < rows; ++r)
    if (aug[r][unknowns] != 0)
      throw std::domain_error("tau function vanishes at this point");
  std::vector<Rational> x(unknowns);
  for (size_t col = 0; col < unknowns; ++col) {
    if (pivot_of[col] == SIZE_MAX)
      throw std::domain_error("tau function vanishes at this point");
    x[col] = aug[pivot_of[col]][unknowns];
  }
  return x;
}

}  // namespace detail

struct BirkhoffFactors {
  QLoopMatrix g_minus;  // 1 + O(z^-1), truncated at N
  QLoopMatrix g_pos;    // exact, nonnegative powers only
};

// Numeric Birkhoff factorization M = g_minus * g_pos. Relies on det(M) being
// a unit monomial a*z^m (true for every translated group element here): then
// g_pos = g_minus^-1 M is polynomial in z of degree at most maxexp(M), and
// requiring g_pos * adj(M) = a z^m (1 + negative) is a finite linear system
// for the coefficients of g_pos.
inline BirkhoffFactors birkhoff_solve_numeric(const QLoopMatrix& M, int N) {
  size_t n = M.size();
  QSeries d = M.det();
  if (!d.is_exact() || d.terms().size() != 1)
    throw std::invalid_argument("birkhoff solver needs a unit-monomial determinant");
  int m = d.terms().begin()->first;
  Rational a = d.terms().begin()->second;

  QLoopMatrix adj = M.adjugate();
  int P = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (!M.at(i, j).is_exact())
        throw std::invalid_argument("birkhoff solver needs exact input");
      if (auto e = M.at(i, j).max_exponent()) P = std::max(P, *e);
    }
  int adj_hi = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (auto e = adj.at(i, j).max_exponent()) adj_hi = std::max(adj_hi, *e);

  // Unknowns: [z^e] g_pos[i][k] for 0 <= e <= P.
  auto unknown = [&](size_t i, size_t k, int e) {
    return (i * n + k) * static_cast<size_t>(P + 1) + static_cast<size_t>(e);
  };
  size_t unknowns = n * n * static_cast<size_t>(P + 1);

  std::vector<std::vector<Rational>> aug;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (int q = m; q <= std::max(m, P + adj_hi); ++q) {
        std::vector<Rational> row(unknowns + 1, Rational(0));
        bool nontrivial = false;
        for (size_t k = 0; k < n; ++k)
          for (int e = 0; e <= P; ++e) {
            int need = q - e;
            const auto& terms = adj.at(k, j).terms();
            auto it = terms.find(need);
            if (it == terms.end()) continue;
            row[unknown(i, k, e)] += it->second;
            nontrivial = true;
          }
        row[unknowns] = (q == m && i == j) ? a : Rational(0);
        if (nontrivial || row[unknowns] != 0) aug.push_back(std::move(row));
      }

  std::vector<Rational> sol = detail::solve_linear_unique(std::move(aug), unknowns);

  QLoopMatrix g_pos(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k)
      for (int e = 0; e <= P; ++e) g_pos.at(i, k).set_coeff(e, sol[unknown(i, k, e)]);

  // g_minus^-1 = g_pos * M^-1 = 1 + X with X strictly negative and exact.
  QLoopMatrix hinv = (g_pos * adj).scaled(QSeries(Rational(1) / a, -m));
  QLoopMatrix X = hinv - QLoopMatrix::identity(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (auto e = X.at(i, j).max_exponent(); e && *e >= 0)
        throw std::logic_error("birkhoff solver: inverse factor not unipotent");

  QLoopMatrix g_minus = QLoopMatrix::identity(n);
  QLoopMatrix power = QLoopMatrix::identity(n);
  for (int j = 1; j <= N; ++j) {
    power = power * X;
    QLoopMatrix signed_power = (j % 2 == 0) ? power : QLoopMatrix(n) - power;
    g_minus = g_minus + signed_power;
  }
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) g_minus.at(i, j) = g_minus.at(i, j).truncated(N);

  return BirkhoffFactors{g_minus, g_pos};
}

}  // namespace looptau
