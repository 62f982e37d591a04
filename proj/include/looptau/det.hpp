#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "looptau/poly.hpp"

namespace looptau {

using PolyMatrix = std::vector<std::vector<Poly>>;

namespace detail {
inline void check_square(const PolyMatrix& m) {
  for (const auto& row : m)
    if (row.size() != m.size()) throw std::invalid_argument("determinant of non-square matrix");
}
}  // namespace detail

// Permutation-expansion determinant, any size. Exponential; this is the
// independent oracle the elimination algorithm is tested against.
inline Poly det_leibniz(const PolyMatrix& m) {
  detail::check_square(m);
  size_t n = m.size();
  if (n == 0) return Poly(1);
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  Poly sum;
  int sign = 1;
  // Iterate permutations in lexicographic order, tracking parity by
  // recomputing inversions (n stays tiny, so this is fine).
  auto parity = [&](const std::vector<size_t>& p) {
    int inv = 0;
    for (size_t i = 0; i < p.size(); ++i)
      for (size_t j = i + 1; j < p.size(); ++j)
        if (p[i] > p[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
  };
  do {
    Poly prod = Poly(1);
    for (size_t i = 0; i < n; ++i) prod *= m[i][perm[i]];
    sign = parity(perm);
    sum += prod * Rational(sign);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

// Fraction-free (Bareiss) elimination; every division is exact in the
// polynomial ring. Sizes up to 3 use direct expansion.
inline Poly det_fraction_free(const PolyMatrix& m) {
  detail::check_square(m);
  size_t n = m.size();
  if (n == 0) return Poly(1);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (n == 3)
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);

  PolyMatrix a = m;
  Poly prev = Poly(1);
  int sign = 1;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k].is_zero()) {
      size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k].is_zero()) ++swap_row;
      if (swap_row == n) return Poly();  // a zero column below the pivot: det 0
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (size_t i = k + 1; i < n; ++i)
      for (size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).divided_exact(prev);
    prev = a[k][k];
  }
  return sign == 1 ? a[n - 1][n - 1] : -a[n - 1][n - 1];
}

}  // namespace looptau
