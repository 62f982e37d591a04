#include <catch2/catch_amalgamated.hpp>

#include "looptau/det.hpp"
#include "looptau/matrix.hpp"
#include "looptau/poly.hpp"
#include "looptau/ratfunc.hpp"
#include "looptau/rng.hpp"
#include "looptau/series.hpp"
#include "looptau/window.hpp"

using namespace looptau;

namespace {

Poly random_poly(Rng& rng, int max_terms, char family = 'c') {
  Poly p;
  int terms = rng.uniform_int(1, max_terms);
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    int vars = rng.uniform_int(0, 2);
    for (int v = 0; v < vars; ++v)
      m = m * Monomial::var(VarId{family, rng.uniform_int(-2, 2)}, rng.uniform_int(1, 2));
    p.add_term(m, rng.rational(4, 3));
  }
  return p;
}

QSeries random_unit_series(Rng& rng, int depth) {
  QSeries s(Rational(1));
  for (int e = -1; e >= -depth; --e) s.set_coeff(e, rng.rational(3, 2));
  return s;
}

}  // namespace

TEST_CASE("rationals are canonical") {
  REQUIRE(make_rational(2, 6) == make_rational(1, 3));
  REQUIRE(rational_string(make_rational(2, 6)) == "1/3");
  REQUIRE(rational_string(make_rational(-4, 8)) == "-1/2");
  REQUIRE(rational_string(Rational(7)) == "7/1");
  REQUIRE_THROWS_AS(make_rational(1, 0), std::invalid_argument);
}

TEST_CASE("monomial product, division, order") {
  Monomial c0 = Monomial::var(VarId{'c', 0});
  Monomial c1 = Monomial::var(VarId{'c', 1});
  Monomial prod = c0 * c1 * c0;
  REQUIRE(prod.exponent(VarId{'c', 0}) == 2);
  REQUIRE(prod.exponent(VarId{'c', 1}) == 1);
  REQUIRE(prod.str() == "c[0]^2*c[1]");
  REQUIRE(c0.divides(prod));
  REQUIRE(c0.divide_from(prod).str() == "c[0]*c[1]");
  REQUIRE_FALSE(prod.divides(c0));

  // Serialization order: prefixes first, then by (family, index, exponent).
  REQUIRE(Monomial() < c0);
  REQUIRE(c0 < c0 * c0);
  REQUIRE(c0 * c1 < c0 * c0);  // exponent compares after index
  REQUIRE(c0 * c1 < c1);

  // Lex term order is multiplicative.
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Monomial a, b, g;
    for (int v = 0; v < 2; ++v) {
      a = a * Monomial::var(VarId{'c', rng.uniform_int(-2, 2)}, rng.uniform_int(1, 2));
      b = b * Monomial::var(VarId{'c', rng.uniform_int(-2, 2)}, rng.uniform_int(1, 2));
      g = g * Monomial::var(VarId{'c', rng.uniform_int(-2, 2)}, rng.uniform_int(1, 2));
    }
    if (Monomial::lex_term_less(a, b)) {
      REQUIRE(Monomial::lex_term_less(a * g, b * g));
    }
  }
}

TEST_CASE("polynomial canonical text") {
  Poly c0 = Poly::var('c', 0);
  Poly c1 = Poly::var('c', 1);
  Poly c2 = Poly::var('c', 2);
  REQUIRE((c0 * c2 - c1 * c1).str() == "+1/1*c[0]*c[2] -1/1*c[1]^2");
  Poly sq = (c0 + Poly(1)) * (c0 + Poly(1));
  REQUIRE(sq.str() == "+1/1 +2/1*c[0] +1/1*c[0]^2");
  REQUIRE(Poly().str() == "0");
  REQUIRE(Poly::var('c', -3).str() == "+1/1*c[-3]");
  REQUIRE((c0 - c0).str() == "0");
  REQUIRE((c0 - c0).is_zero());
  REQUIRE(Poly::var('d', 2).str() == "+1/1*d[2]");
}

TEST_CASE("polynomial ring axioms, randomized") {
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    Poly a = random_poly(rng, 3);
    Poly b = random_poly(rng, 3);
    Poly c = random_poly(rng, 3);
    REQUIRE(a + b == b + a);
    REQUIRE(a * b == b * a);
    REQUIRE((a + b) + c == a + (b + c));
    REQUIRE((a * b) * c == a * (b * c));
    REQUIRE(a * (b + c) == a * b + a * c);
    REQUIRE((a - a).is_zero());
  }
}

TEST_CASE("substitution agrees with direct evaluation") {
  Rng rng(13);
  for (int i = 0; i < 40; ++i) {
    Poly p = random_poly(rng, 4);
    std::map<VarId, Rational> point;
    for (const VarId& v : p.variables()) point[v] = rng.rational(3, 2);
    Rational expect = 0;
    for (const auto& [m, coef] : p.terms()) {
      Rational term = coef;
      for (const auto& [v, e] : m.factors())
        for (int k = 0; k < e; ++k) term *= point.at(v);
      expect += term;
    }
    REQUIRE(p.substitute(point) == expect);
  }
  REQUIRE_THROWS_AS(Poly::var('c', 0).substitute({}), std::out_of_range);
}

TEST_CASE("exact polynomial division") {
  Rng rng(17);
  for (int i = 0; i < 60; ++i) {
    Poly p = random_poly(rng, 3);
    Poly d = random_poly(rng, 3);
    if (d.is_zero()) d = Poly(1);
    REQUIRE((p * d).divided_exact(d) == p);
  }
  Poly c0 = Poly::var('c', 0);
  Poly c1 = Poly::var('c', 1);
  REQUIRE_THROWS_WITH((c0 * c1 + Poly(1)).divided_exact(c0),
                      "polynomial division is not exact");
}

TEST_CASE("hankel 2x2 determinant") {
  PolyMatrix m = {{Poly::var('c', 0), Poly::var('c', 1)},
                  {Poly::var('c', 1), Poly::var('c', 2)}};
  Poly expect = Poly::var('c', 0) * Poly::var('c', 2) - Poly::var('c', 1) * Poly::var('c', 1);
  REQUIRE(det_fraction_free(m) == expect);
  REQUIRE(det_leibniz(m) == expect);
}

TEST_CASE("fraction-free determinant matches permanent expansion") {
  Rng rng(19);
  for (size_t n = 2; n <= 4; ++n) {
    for (int rep = 0; rep < 8; ++rep) {
      PolyMatrix m(n, std::vector<Poly>(n));
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m[i][j] = random_poly(rng, 2);
      REQUIRE(det_fraction_free(m) == det_leibniz(m));
    }
  }
}

TEST_CASE("determinant handles zero pivots and singularity") {
  Rng rng(23);
  PolyMatrix m(4, std::vector<Poly>(4));
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j) m[i][j] = random_poly(rng, 2);
  m[0][0] = Poly();
  REQUIRE(det_fraction_free(m) == det_leibniz(m));

  m[2] = m[1];  // repeated row
  REQUIRE(det_fraction_free(m).is_zero());

  PolyMatrix perm = {{Poly(), Poly(1), Poly(), Poly()},
                     {Poly(1), Poly(), Poly(), Poly()},
                     {Poly(), Poly(), Poly(1), Poly()},
                     {Poly(), Poly(), Poly(), Poly(1)}};
  REQUIRE(det_fraction_free(perm) == Poly(Rational(-1)));
}

TEST_CASE("rational functions compare by cross-multiplication") {
  Poly c0 = Poly::var('c', 0);
  Poly c1 = Poly::var('c', 1);
  RatFunc a(c0 * c0 - c1 * c1, c0 - c1);
  REQUIRE(a == RatFunc(c0 + c1));
  RatFunc s = RatFunc(Poly(1), c0) + RatFunc(Poly(1), c1);
  REQUIRE(s == RatFunc(c0 + c1, c0 * c1));
  REQUIRE((s - s).is_zero());
  REQUIRE(a.reciprocal() * a == RatFunc(1));
  REQUIRE_THROWS_AS(RatFunc(c0, Poly()), std::domain_error);
}

TEST_CASE("rational function normalization stays cheap but canonical") {
  Poly c0 = Poly::var('c', 0);
  Poly c1 = Poly::var('c', 1);
  RatFunc f(c0 * c0 * c1, c0 * c1 * c1);
  REQUIRE(f.num() == c0);
  REQUIRE(f.den() == c1);
  RatFunc g(c0, c1 * Rational(2));
  REQUIRE(g.den() == c1);
  REQUIRE(g.num() == c0 * make_rational(1, 2));
  REQUIRE(g.str() == "(+1/2*c[0]) / (+1/1*c[1])");
  RatFunc whole(c0 + c1);
  REQUIRE(whole.str() == "+1/1*c[0] +1/1*c[1]");
}

TEST_CASE("series truncation bookkeeping") {
  QSeries a = QSeries::z_pow(2);
  a.set_coeff(-1, make_rational(1, 2));
  REQUIRE(a.is_exact());
  REQUIRE(a.coeff(2) == 1);
  REQUIRE(a.coeff(-5) == 0);

  QSeries b = QSeries::with_trunc(3);
  b.set_coeff(2, Rational(1));
  QSeries c = QSeries::with_trunc(4);
  c.set_coeff(1, Rational(1));
  QSeries prod = b * c;
  REQUIRE(prod.trunc() == 2);  // min(3 - 1, 4 - 2, 3 + 4 + 1)
  REQUIRE(prod.coeff(3) == 1);
  REQUIRE_THROWS_AS(prod.coeff(-3), std::out_of_range);

  REQUIRE((a.shifted(-2).coeff(0)) == 1);
  REQUIRE(b.shifted(5).trunc() == -2);
  REQUIRE(b.truncated(1).trunc() == 1);
}

TEST_CASE("series inversion against multiplication") {
  QSeries g(Rational(1));
  g.set_coeff(-1, make_rational(-1, 2));
  QSeries ginv = g.inverted(3);
  REQUIRE(ginv.trunc() == 3);
  REQUIRE(ginv.coeff(0) == 1);
  REQUIRE(ginv.coeff(-1) == make_rational(1, 2));
  REQUIRE(ginv.coeff(-2) == make_rational(1, 4));
  REQUIRE(ginv.coeff(-3) == make_rational(1, 8));

  QSeries zsq = QSeries::z_pow(2);
  QSeries zsq_inv = zsq.inverted(4);
  REQUIRE(zsq_inv.is_exact());
  REQUIRE(zsq_inv.coeff(-2) == 1);

  Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    QSeries u = random_unit_series(rng, rng.uniform_int(0, 4));
    int m = rng.uniform_int(-2, 2);
    QSeries s = u.shifted(m);
    int n = rng.uniform_int(0, 6);
    QSeries sinv = s.inverted(n);
    REQUIRE(sinv.trunc() >= n);
    QSeries back = s * sinv;
    REQUIRE(back.trunc() >= n - m);
    REQUIRE(equal_down_to(back, QSeries(Rational(1)), back.trunc()));
  }
}

TEST_CASE("series inversion failure modes") {
  REQUIRE_THROWS_WITH(QSeries().inverted(2), "series not invertible at this truncation");
  REQUIRE_THROWS_WITH(QSeries::with_trunc(5).inverted(2),
                      "series not invertible at this truncation");

  PSeries p(Poly::var('c', 0));
  REQUIRE_THROWS_WITH(p.inverted(2), "series not invertible at this truncation");

  // Unit monomial coefficients do invert over polynomials.
  PSeries q(Poly(Rational(2)));
  q.set_coeff(-1, Poly::var('c', 1));
  PSeries qinv = q.inverted(2);
  REQUIRE(equal_down_to(q * qinv, PSeries(Poly(1)), 2));

  // Too-shallow knowledge: top term sits above the window of certainty.
  QSeries shallow = QSeries::with_trunc(0);
  shallow.set_coeff(0, Rational(1));
  REQUIRE_THROWS_WITH(shallow.inverted(5), "series not invertible at this truncation");
}

TEST_CASE("loop matrix inverse and negative part") {
  Rng rng(31);
  for (size_t n = 2; n <= 3; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      QLoopMatrix m = QLoopMatrix::identity(n);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
          for (int e = -1; e >= -2; --e) m.at(i, j).set_coeff(e, rng.rational(2, 2));
      QLoopMatrix inv = m.inverse(5);
      REQUIRE(equal_down_to(m * inv, QLoopMatrix::identity(n), 5));
      REQUIRE(equal_down_to(inv * m, QLoopMatrix::identity(n), 5));
    }
  }

  QLoopMatrix w = QLoopMatrix::identity(2);
  REQUIRE(w.negative_part_vanishes());
  w.at(1, 0).set_coeff(-2, Rational(3));
  auto witness = w.negative_part_witness();
  REQUIRE(witness.has_value());
  REQUIRE(witness->row == 1);
  REQUIRE(witness->col == 0);
  REQUIRE(witness->exponent == -2);
  REQUIRE(witness->coeff == 3);
}

TEST_CASE("adjugate identity for exact matrices") {
  Rng rng(37);
  for (int rep = 0; rep < 10; ++rep) {
    QLoopMatrix m(3);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j)
        for (int e = -1; e <= 1; ++e) m.at(i, j).set_coeff(e, rng.rational(2, 2));
    QLoopMatrix prod = m * m.adjugate();
    QLoopMatrix expect = QLoopMatrix::identity(3).scaled(m.det());
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) {
        QSeries diff = prod.at(i, j) - expect.at(i, j);
        REQUIRE(diff.is_exact_zero());
      }
  }
}

TEST_CASE("matrix entries can move to a larger coefficient ring") {
  PLoopMatrix m = PLoopMatrix::identity(2);
  m.at(0, 1).set_coeff(-1, Poly::var('c', 0));
  FLoopMatrix f = map_entries<RatFunc>(m, [](const Poly& p) { return RatFunc(p); });
  REQUIRE(f.at(0, 1).coeff(-1) == RatFunc(Poly::var('c', 0)));
  REQUIRE(f.at(0, 0).coeff(0) == RatFunc(1));
}

TEST_CASE("windows and deterministic rng") {
  Window w(-3, 4);
  REQUIRE(w.contains(-3));
  REQUIRE(w.contains(4));
  REQUIRE_FALSE(w.contains(5));
  REQUIRE(w.width() == 8);
  REQUIRE(w.str() == "[-3,4]");
  REQUIRE_THROWS_AS(Window(2, 1), std::invalid_argument);

  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) REQUIRE(a.uniform_int(-10, 10) == b.uniform_int(-10, 10));
  Rng c(42);
  std::vector<int> first;
  for (int i = 0; i < 10; ++i) first.push_back(c.uniform_int(0, 1000));
  Rng d(43);
  std::vector<int> second;
  for (int i = 0; i < 10; ++i) second.push_back(d.uniform_int(0, 1000));
  REQUIRE(first != second);
}
