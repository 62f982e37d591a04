#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "looptau/series.hpp"

namespace looptau {

template <typename R>
struct NegativeWitness {
  size_t row = 0, col = 0;
  int exponent = 0;
  R coeff;
};

// Square matrix over truncated Laurent series, sized for loop groups (n = 2, 3).
template <typename R>
class LoopMatrix {
 public:
  LoopMatrix() : n_(0) {}
  explicit LoopMatrix(size_t n) : n_(n), e_(n, std::vector<Series<R>>(n)) {}

  static LoopMatrix identity(size_t n) {
    LoopMatrix m(n);
    for (size_t i = 0; i < n; ++i) m.e_[i][i] = Series<R>(RingTraits<R>::one());
    return m;
  }

  size_t size() const { return n_; }
  Series<R>& at(size_t i, size_t j) { return e_[i][j]; }
  const Series<R>& at(size_t i, size_t j) const { return e_[i][j]; }

  friend LoopMatrix operator*(const LoopMatrix& a, const LoopMatrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("matrix size mismatch");
    LoopMatrix out(a.n_);
    for (size_t i = 0; i < a.n_; ++i)
      for (size_t j = 0; j < a.n_; ++j) {
        Series<R> s = a.e_[i][0] * b.e_[0][j];
        for (size_t k = 1; k < a.n_; ++k) s += a.e_[i][k] * b.e_[k][j];
        out.e_[i][j] = s;
      }
    return out;
  }

  friend LoopMatrix operator+(const LoopMatrix& a, const LoopMatrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("matrix size mismatch");
    LoopMatrix out = a;
    for (size_t i = 0; i < a.n_; ++i)
      for (size_t j = 0; j < a.n_; ++j) out.e_[i][j] += b.e_[i][j];
    return out;
  }

  friend LoopMatrix operator-(const LoopMatrix& a, const LoopMatrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("matrix size mismatch");
    LoopMatrix out = a;
    for (size_t i = 0; i < a.n_; ++i)
      for (size_t j = 0; j < a.n_; ++j) out.e_[i][j] -= b.e_[i][j];
    return out;
  }

  LoopMatrix scaled(const Series<R>& s) const {
    LoopMatrix out = *this;
    for (auto& row : out.e_)
      for (auto& entry : row) entry *= s;
    return out;
  }

  Series<R> det() const {
    if (n_ == 0) return Series<R>(RingTraits<R>::one());
    if (n_ == 1) return e_[0][0];
    if (n_ == 2) return e_[0][0] * e_[1][1] - e_[0][1] * e_[1][0];
    if (n_ == 3)
      return e_[0][0] * (e_[1][1] * e_[2][2] - e_[1][2] * e_[2][1]) -
             e_[0][1] * (e_[1][0] * e_[2][2] - e_[1][2] * e_[2][0]) +
             e_[0][2] * (e_[1][0] * e_[2][1] - e_[1][1] * e_[2][0]);
    throw std::invalid_argument("loop matrix determinant limited to n <= 3");
  }

  LoopMatrix adjugate() const {
    LoopMatrix out(n_);
    if (n_ == 1) {
      out.e_[0][0] = Series<R>(RingTraits<R>::one());
      return out;
    }
    for (size_t i = 0; i < n_; ++i)
      for (size_t j = 0; j < n_; ++j) {
        Series<R> minor = cofactor_minor(j, i);
        out.e_[i][j] = ((i + j) % 2 == 0) ? minor : -minor;
      }
    return out;
  }

  // Inverse, entries correct at least down to z^-n. Throws when the
  // determinant is not invertible deep enough.
  LoopMatrix inverse(int n) const {
    Series<R> d = det();
    LoopMatrix adj = adjugate();
    int slack = 0;
    for (const auto& row : adj.e_)
      for (const auto& entry : row)
        if (auto m = entry.max_exponent()) slack = std::max(slack, *m);
    Series<R> dinv = d.inverted(n + slack + 2);
    LoopMatrix out(n_);
    for (size_t i = 0; i < n_; ++i)
      for (size_t j = 0; j < n_; ++j) out.e_[i][j] = adj.e_[i][j] * dinv;
    LoopMatrix check = *this * out;
    LoopMatrix id = identity(n_);
    for (size_t i = 0; i < n_; ++i)
      for (size_t j = 0; j < n_; ++j)
        if (!equal_down_to(check.e_[i][j], id.e_[i][j], n))
          throw std::logic_error("matrix inverse verification failed");
    return out;
  }

  // First entry (row-major, most negative exponent first) carrying a nonzero
  // coefficient at a negative power of z; nullopt when the stored expansion
  // has no such term.
  std::optional<NegativeWitness<R>> negative_part_witness() const {
    for (size_t i = 0; i < n_; ++i)
      for (size_t j = 0; j < n_; ++j)
        for (const auto& [e, c] : e_[i][j].terms())
          if (e < 0) return NegativeWitness<R>{i, j, e, c};
    return std::nullopt;
  }

  bool negative_part_vanishes() const { return !negative_part_witness().has_value(); }

  friend bool equal_down_to(const LoopMatrix& a, const LoopMatrix& b, int n) {
    if (a.n_ != b.n_) return false;
    for (size_t i = 0; i < a.n_; ++i)
      for (size_t j = 0; j < a.n_; ++j)
        if (!equal_down_to(a.e_[i][j], b.e_[i][j], n)) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    for (size_t i = 0; i < n_; ++i) {
      os << "[ ";
      for (size_t j = 0; j < n_; ++j) {
        if (j) os << " | ";
        os << e_[i][j].str();
      }
      os << " ]\n";
    }
    return os.str();
  }

 private:
  Series<R> cofactor_minor(size_t skip_row, size_t skip_col) const {
    std::vector<size_t> rows, cols;
    for (size_t i = 0; i < n_; ++i)
      if (i != skip_row) rows.push_back(i);
    for (size_t j = 0; j < n_; ++j)
      if (j != skip_col) cols.push_back(j);
    if (rows.size() == 1) return e_[rows[0]][cols[0]];
    if (rows.size() == 2)
      return e_[rows[0]][cols[0]] * e_[rows[1]][cols[1]] -
             e_[rows[0]][cols[1]] * e_[rows[1]][cols[0]];
    throw std::invalid_argument("loop matrix adjugate limited to n <= 3");
  }

  size_t n_;
  std::vector<std::vector<Series<R>>> e_;
};

// Reinterpret a matrix over one coefficient ring inside another via fn.
template <typename R2, typename R1, typename Fn>
LoopMatrix<R2> map_entries(const LoopMatrix<R1>& m, Fn fn) {
  LoopMatrix<R2> out(m.size());
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m.size(); ++j) {
      Series<R2> s = Series<R2>::with_trunc(m.at(i, j).trunc());
      for (const auto& [e, c] : m.at(i, j).terms()) s.set_coeff(e, fn(c));
      out.at(i, j) = s;
    }
  return out;
}

using QLoopMatrix = LoopMatrix<Rational>;
using PLoopMatrix = LoopMatrix<Poly>;
using FLoopMatrix = LoopMatrix<RatFunc>;

}  // namespace looptau
