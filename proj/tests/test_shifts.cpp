#include <catch2/catch_amalgamated.hpp>

#include "looptau/rng.hpp"
#include "looptau/shifts.hpp"

using namespace looptau;

namespace {

const Window kWin(-6, 8);

Poly cvar(int k) { return Poly::var('c', k); }
Poly dvar(int k) { return Poly::var('d', k); }

Poly random_window_poly(Rng& rng, char family, int lo, int hi, int max_terms) {
  Poly p;
  int terms = rng.uniform_int(1, max_terms);
  for (int t = 0; t < terms; ++t) {
    Monomial m;
    int vars = rng.uniform_int(1, 2);
    for (int v = 0; v < vars; ++v)
      m = m * Monomial::var(VarId{family, rng.uniform_int(lo, hi)}, 1);
    p.add_term(m, rng.rational(3, 2));
  }
  return p;
}

}  // namespace

TEST_CASE("index translation on powers") {
  REQUIRE(shift_power(cvar(3), 'c', 1, kWin) == cvar(4));
  REQUIRE(shift_power(Poly(1), 'c', 1, kWin).is_zero());
  REQUIRE(shift_power(cvar(0) * dvar(2), 'c', 2, kWin) == cvar(2) * dvar(2));
  // shifting past the window kills the term
  REQUIRE(shift_power(cvar(8), 'c', 1, kWin).is_zero());
  REQUIRE(shift_power(cvar(-6), 'c', -1, kWin).is_zero());
  // no variable of the family: annihilated, scalar included
  REQUIRE(shift_power(dvar(0), 'c', 1, kWin).is_zero());
}

TEST_CASE("translation composes additively inside the window") {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    int a = rng.uniform_int(-2, 2);
    int b = rng.uniform_int(-2, 2);
    Poly f = random_window_poly(rng, 'c', -2, 3, 3);
    Poly two_step = shift_power(shift_power(f, 'c', a, kWin), 'c', b, kWin);
    Poly one_step = shift_power(f, 'c', a + b, kWin);
    REQUIRE(two_step == one_step);
  }
}

TEST_CASE("plus field on generators and products") {
  ShiftSpec plus{'c', +1, 0, kWin};
  PSeries g = shift_field_apply(cvar(0), plus);
  REQUIRE(g.is_exact());
  REQUIRE(g.coeff(0) == cvar(0));
  REQUIRE(g.coeff(-1) == -cvar(1));
  REQUIRE(g.coeff(-2).is_zero());

  PSeries prod = shift_field_apply(cvar(0) * cvar(2), plus);
  REQUIRE(prod.coeff(0) == cvar(0) * cvar(2));
  REQUIRE(prod.coeff(-1) == -(cvar(0) * cvar(3) + cvar(1) * cvar(2)));
  REQUIRE(prod.coeff(-2) == cvar(1) * cvar(3));
  REQUIRE(prod.coeff(-3).is_zero());
  REQUIRE(partial_shift(cvar(0) * cvar(2), 'c', +1, 1, kWin) ==
          -(cvar(0) * cvar(3) + cvar(1) * cvar(2)));

  // coefficients vanish beyond the family degree
  Rng rng(43);
  for (int i = 0; i < 30; ++i) {
    Poly f = random_window_poly(rng, 'c', -3, 3, 3);
    PSeries s = shift_field_apply(f, plus);
    int deg = f.degree_in_family('c');
    for (int n = deg + 1; n <= deg + 3; ++n) REQUIRE(s.coeff(-n).is_zero());
  }

  // at the window edge the partner variable is zero
  PSeries edge = shift_field_apply(cvar(8), plus);
  REQUIRE(edge.coeff(0) == cvar(8));
  REQUIRE(edge.coeff(-1).is_zero());
}

TEST_CASE("minus field expands geometrically") {
  ShiftSpec minus{'c', -1, 2, kWin};
  PSeries g = shift_field_apply(cvar(0), minus);
  REQUIRE(g.trunc() == 2);
  REQUIRE(g.coeff(0) == cvar(0));
  REQUIRE(g.coeff(-1) == cvar(1));
  REQUIRE(g.coeff(-2) == cvar(2));
  REQUIRE_THROWS_AS(g.coeff(-3), std::out_of_range);

  // once the window is exhausted the expansion is exact
  ShiftSpec deep{'c', -1, 3, kWin};
  PSeries e = shift_field_apply(cvar(6), deep);
  REQUIRE(e.is_exact());
  REQUIRE(e.coeff(-2) == cvar(8));
  REQUIRE(e.coeff(-3).is_zero());
}

TEST_CASE("z^0 coefficient is the window restriction") {
  Rng rng(47);
  for (int i = 0; i < 30; ++i) {
    Poly f = random_window_poly(rng, 'c', -6, 8, 4);
    for (int sign : {+1, -1}) {
      ShiftSpec spec{'c', sign, 3, kWin};
      REQUIRE(shift_field_apply(f, spec).coeff(0) == f);
    }
  }
  // out-of-window variables are zero
  Window narrow(0, 2);
  ShiftSpec spec{'c', +1, 0, narrow};
  Poly f = cvar(1) + cvar(1) * cvar(3);
  REQUIRE(shift_field_apply(f, spec).coeff(0) == cvar(1));
}

TEST_CASE("minus field inverts the plus field on the interior") {
  Rng rng(53);
  for (int i = 0; i < 25; ++i) {
    Poly f = random_window_poly(rng, 'c', -2, 2, 3);
    ShiftSpec plus{'c', +1, 0, kWin};
    ShiftSpec minus{'c', -1, 4, kWin};
    PSeries round = shift_field_apply(shift_field_apply(f, plus), minus);
    REQUIRE(round.trunc() >= 4);
    REQUIRE(equal_down_to(round, PSeries{f}, 4));
  }
}

TEST_CASE("fields of different families stack in any order") {
  ShiftSpec cp{'c', +1, 0, kWin};
  ShiftSpec dp{'d', +1, 0, kWin};
  PSeries lone = compose_fields(dvar(0), {cp, dp});
  REQUIRE(lone.coeff(0) == dvar(0));
  REQUIRE(lone.coeff(-1) == -dvar(1));

  PSeries both = compose_fields(cvar(0) * dvar(0), {cp, dp});
  REQUIRE(both.coeff(0) == cvar(0) * dvar(0));
  REQUIRE(both.coeff(-1) == -(cvar(0) * dvar(1) + cvar(1) * dvar(0)));
  REQUIRE(both.coeff(-2) == cvar(1) * dvar(1));

  Rng rng(59);
  for (int i = 0; i < 50; ++i) {
    Poly f = random_window_poly(rng, 'c', -2, 2, 2) * random_window_poly(rng, 'd', -2, 2, 2);
    ShiftSpec cm{'c', -1, 3, kWin};
    ShiftSpec dm{'d', -1, 3, kWin};
    PSeries ab = compose_fields(f, {cm, dm});
    PSeries ba = compose_fields(f, {dm, cm});
    REQUIRE(ab.trunc() == ba.trunc());
    REQUIRE(equal_down_to(ab, ba, std::min(ab.trunc(), 3)));
  }

  REQUIRE_THROWS_AS(compose_fields(cvar(0), {cp, ShiftSpec{'c', -1, 2, kWin}}),
                    std::invalid_argument);
}
