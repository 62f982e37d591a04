#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <tuple>
#include <utility>

#include "looptau/det.hpp"
#include "looptau/rng.hpp"
#include "looptau/tau_gl2.hpp"
#include "looptau/tau_gl3.hpp"

using namespace looptau;

namespace {

std::map<VarId, Rational> random_point(Rng& rng, const Window& w) {
  std::map<VarId, Rational> out;
  for (char fam : {'c', 'd', 'e'})
    for (int i = w.lo; i <= w.hi; ++i) out[VarId{fam, i}] = rng.nonzero_rational(5, 4);
  return out;
}

RatFunc ratio(const TauTable3& t, int kn, int ln, int an, int bn, int kd, int ld, int ad,
              int bd) {
  return RatFunc(t.tau(kn, ln, an, bn), t.tau(kd, ld, ad, bd));
}

}  // namespace

TEST_CASE("residue formula matches the closed small cases") {
  Window w(-5, 5);
  TauTable3 t(w);

  REQUIRE(t.tau(-1, 0, 0, 0).is_zero());
  REQUIRE(t.tau(0, -1, 1, -1).is_zero());
  REQUIRE(t.tau(-2, -1, 0, 0).is_zero());
  REQUIRE(t.tau(0, 0, 0, 0) == Poly(1));
  REQUIRE(t.tau(0, 0, 2, -2) == Poly(1));

  // single-family columns are Hankel determinants; the c column is the
  // rank-two table in the difference variable
  TauTable2 t2(w);
  for (int k = 0; k <= 3; ++k)
    for (auto [a, b] : {std::pair{0, 0}, {1, 0}, {-1, 1}, {2, 0}}) {
      REQUIRE(t.tau(k, 0, a, b) == hankel_tau('c', a - b, k, w));
      REQUIRE(t.tau(k, 0, a, b) == t2.tau(k, a - b));
      REQUIRE(t.tau(0, k, a, b) == hankel_tau('e', b, k, w));
    }

  for (auto [a, b] : {std::pair{0, 0}, {1, 0}, {0, -1}, {-2, 1}, {4, -3}}) {
    REQUIRE(t.tau(1, 1, a, b) == closed_tau11(a, b, w));
    REQUIRE(t.tau(1, 2, a, b) == closed_tau12(a, b, w));
    REQUIRE(t.tau(2, 1, a, b) == closed_tau21(a, b, w));
  }
}

TEST_CASE("residue expansion is stable in depth and under merging") {
  Window w(-4, 4);
  for (auto [nc, nd, ne] :
       {std::tuple{1, 0, 1}, {2, 0, 1}, {1, 1, 1}, {2, 1, 1}, {1, 0, 2}})
    for (auto [a, b] : {std::pair{0, 0}, {1, -1}}) {
      int depth = residue_order(nc, nd, ne, w);
      Poly base = residue_coeff(nc, nd, ne, a, b, w);
      REQUIRE(base == residue_coeff(nc, nd, ne, a, b, w, depth + 2));
      REQUIRE(base == residue_coeff(nc, nd, ne, a, b, w, depth, false));
    }
  REQUIRE_THROWS_AS(residue_coeff(-1, 0, 0, 0, 0, w), std::invalid_argument);
}

TEST_CASE("residue summands carry exact per-family degrees") {
  Window w(-4, 4);
  for (auto [nc, nd, ne] : {std::tuple{2, 1, 1}, {1, 2, 1}, {3, 0, 2}, {0, 2, 2}}) {
    Poly p = residue_coeff(nc, nd, ne, 0, 0, w);
    REQUIRE_FALSE(p.is_zero());
    for (const auto& [m, c] : p.terms()) {
      REQUIRE(m.degree_in_family('c') == nc);
      REQUIRE(m.degree_in_family('d') == nd);
      REQUIRE(m.degree_in_family('e') == ne);
    }
  }
}

TEST_CASE("difference lattice identities hold on the test box") {
  TauTable3 t(Window(-4, 4));
  for (int k : {0, 1})
    for (int l : {0, 1})
      for (int a : {-1, 0, 1})
        for (int b : {-1, 0, 1}) {
          REQUIRE(three_term_alpha_residual(k, l, a, b, t).is_zero());
          REQUIRE(three_term_beta_residual(k, l, a, b, t).is_zero());
          REQUIRE(qsystem3_alpha_residual(k, l, a, b, t).is_zero());
          REQUIRE(qsystem3_beta_residual(k, l, a, b, t).is_zero());
        }
  REQUIRE(three_term_alpha_residual(2, 1, 0, 0, t).is_zero());
  REQUIRE(three_term_beta_residual(1, 2, 0, 0, t).is_zero());
  REQUIRE(qsystem3_alpha_residual(2, 2, 0, 0, t).is_zero());
  REQUIRE(qsystem3_beta_residual(2, 2, 0, 0, t).is_zero());
}

TEST_CASE("curvature components vanish entry by entry") {
  TauTable3 t(Window(-4, 4));
  for (auto [k, l] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}})
    for (auto [a, b] : {std::pair{0, 0}, {1, -1}}) {
      REQUIRE(curvature_component_residual_k(0, 0, k, l, a, b, t).is_zero());
      REQUIRE(curvature_component_residual_k(0, 2, k, l, a, b, t).is_zero());
      REQUIRE(curvature_component_residual_k(2, 0, k, l, a, b, t).is_zero());
      REQUIRE(curvature_component_residual_l(1, 1, k, l, a, b, t).is_zero());
      REQUIRE(curvature_component_residual_l(1, 0, k, l, a, b, t).is_zero());
      REQUIRE(curvature_component_residual_l(0, 1, k, l, a, b, t).is_zero());
      REQUIRE(quartic_relation_residual_k(k, l, a, b, t).is_zero());
      REQUIRE(quartic_relation_residual_l(k, l, a, b, t).is_zero());
      REQUIRE(rearranged_relation_residual_k(k, l, a, b, t).is_zero());
      REQUIRE(rearranged_relation_residual_l(k, l, a, b, t).is_zero());
    }
  REQUIRE_THROWS_AS(curvature_component_residual_k(1, 1, 0, 0, 0, 0, t),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(curvature_component_residual_l(0, 0, 0, 0, 0, 0, t),
                    std::invalid_argument);
}

TEST_CASE("tau quotients step through the table") {
  TauTable3 t(Window(-4, 4));
  REQUIRE(h3_k(0, 0, 0, 0, t) == RatFunc(Poly::var('c', 0)));
  REQUIRE(h3_l(0, 0, 1, 1, t) == RatFunc(Poly::var('e', 1)));
  REQUIRE(h3_kl(0, 0, 0, 0, t) == RatFunc(t.tau(1, 1, 0, 0)));
  TauTable3 narrow(Window(0, 2));
  REQUIRE_THROWS_WITH(h3_k(1, 0, -3, 0, narrow), "tau function vanishes at this point");
}

TEST_CASE("connection matrices have determinant z and quotient entries") {
  TauTable3 t(Window(-4, 4));
  for (auto [k, l, a, b] : {std::tuple{1, 1, 0, 0}, {2, 1, 1, -1}}) {
    const RatFunc srk(k % 2 == 0 ? 1 : -1);

    FLoopMatrix v = connection3(Conn3Kind::RaiseAlpha, k, l, a, b, t);
    REQUIRE(v.det() == FSeries::z_pow(1));
    REQUIRE(v.at(0, 1).coeff(0) == ratio(t, k - 1, l, a + 1, b, k, l, a + 1, b));
    REQUIRE(v.at(0, 2).coeff(0) == srk * ratio(t, k - 1, l - 1, a + 1, b, k, l, a + 1, b));
    REQUIRE(v.at(1, 0).coeff(0) == -ratio(t, k + 1, l, a, b, k, l, a, b));
    REQUIRE(v.at(2, 0).coeff(0) == srk * ratio(t, k + 1, l + 1, a, b, k, l, a, b));
    REQUIRE(v.at(1, 1).coeff(0) == RatFunc(1));
    REQUIRE(v.at(0, 0).coeff(1) == RatFunc(1));
    REQUIRE(v.at(0, 0).coeff(0) == -h3_k(k, l, a, b, t) / h3_k(k - 1, l, a + 1, b, t) +
                                       h3_kl(k, l, a, b, t) / h3_kl(k - 1, l - 1, a + 1, b, t));

    FLoopMatrix vb = connection3(Conn3Kind::RaiseBeta, k, l, a, b, t);
    REQUIRE(vb.det() == FSeries::z_pow(1));
    REQUIRE(vb.at(0, 1).coeff(0) == -ratio(t, k - 1, l, a, b, k, l, a, b));
    REQUIRE(vb.at(1, 0).coeff(0) == ratio(t, k + 1, l, a, b + 1, k, l, a, b + 1));
    REQUIRE(vb.at(1, 2).coeff(0) == srk * ratio(t, k, l - 1, a, b + 1, k, l, a, b + 1));
    REQUIRE(vb.at(2, 1).coeff(0) == -srk * ratio(t, k, l + 1, a, b, k, l, a, b));
    REQUIRE(vb.at(1, 1).coeff(1) == RatFunc(1));
    REQUIRE(vb.at(1, 1).coeff(0) == -h3_l(k, l, a, b, t) / h3_l(k, l - 1, a, b + 1, t) -
                                        h3_k(k, l, a, b + 1, t) / h3_k(k - 1, l, a, b, t));

    FLoopMatrix wk = connection3(Conn3Kind::LowerKRaiseAlpha, k, l, a, b, t);
    REQUIRE(wk.det() == FSeries::z_pow(1));
    REQUIRE(wk.at(0, 1).coeff(0) == -ratio(t, k - 1, l, a, b, k, l, a, b));
    REQUIRE(wk.at(1, 0).coeff(0) == ratio(t, k, l, a + 1, b, k - 1, l, a + 1, b));
    REQUIRE(wk.at(1, 2).coeff(0) ==
            -srk * ratio(t, k - 1, l - 1, a + 1, b, k - 1, l, a + 1, b));
    REQUIRE(wk.at(2, 1).coeff(0) == -srk * ratio(t, k, l + 1, a, b, k, l, a, b));
    REQUIRE(wk.at(1, 1).coeff(1) == RatFunc(1));
    REQUIRE(wk.at(1, 1).coeff(0) == h3_l(k, l, a, b, t) / h3_l(k - 1, l - 1, a + 1, b, t) -
                                        h3_k(k - 1, l, a + 1, b, t) / h3_k(k - 1, l, a, b, t));

    FLoopMatrix wl = connection3(Conn3Kind::LowerLRaiseBeta, k, l, a, b, t);
    REQUIRE(wl.det() == FSeries::z_pow(1));
    REQUIRE(wl.at(0, 2).coeff(0) == -srk * ratio(t, k - 1, l - 1, a, b, k, l, a, b));
    REQUIRE(wl.at(1, 2).coeff(0) == -srk * ratio(t, k, l - 1, a, b, k, l, a, b));
    REQUIRE(wl.at(2, 0).coeff(0) == -srk * ratio(t, k + 1, l, a, b + 1, k, l - 1, a, b + 1));
    REQUIRE(wl.at(2, 1).coeff(0) == srk * ratio(t, k, l, a, b + 1, k, l - 1, a, b + 1));
    REQUIRE(wl.at(2, 2).coeff(1) == RatFunc(1));
    REQUIRE(wl.at(2, 2).coeff(0) ==
            h3_kl(k, l - 1, a, b + 1, t) / h3_kl(k - 1, l - 1, a, b, t) -
                h3_l(k, l - 1, a, b + 1, t) / h3_l(k, l - 1, a, b, t));
  }

  // boundary column: the step-up entries vanish and the diagonal is plain z
  FLoopMatrix v0 = connection3(Conn3Kind::RaiseAlpha, 0, 1, 0, 0, t);
  REQUIRE(v0.at(0, 1).is_exact_zero());
  REQUIRE(v0.at(0, 2).is_exact_zero());
  REQUIRE(v0.at(0, 0) == FSeries::z_pow(1));

  REQUIRE_THROWS_AS(connection3(Conn3Kind::LowerKRaiseAlpha, 0, 1, 0, 0, t),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(connection3(Conn3Kind::LowerLRaiseBeta, 1, 0, 0, 0, t),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(connection3(Conn3Kind::RaiseAlpha, -1, 0, 0, 0, t),
                    std::invalid_argument);
}

TEST_CASE("inverse step-down connections in closed form") {
  TauTable3 t(Window(-4, 4));
  for (auto [k, l] : {std::pair{1, 1}, {2, 1}}) {
    const RatFunc srk(k % 2 == 0 ? 1 : -1);

    FLoopMatrix wi = connection3(Conn3Kind::LowerKRaiseAlpha, k, l, 0, 0, t).inverse(1);
    REQUIRE(wi.at(0, 0).coeff(0) == RatFunc(1));
    REQUIRE(wi.at(0, 0).coeff(-1) == -h3_k(k - 1, l, 1, 0, t) / h3_k(k - 1, l, 0, 0, t));
    REQUIRE(wi.at(0, 1).coeff(0).is_zero());
    REQUIRE(wi.at(0, 1).coeff(-1) == h3_k(k - 1, l, 0, 0, t).reciprocal());
    REQUIRE(wi.at(0, 2).coeff(-1) ==
            srk / (h3_k(k - 1, l, 0, 0, t) * h3_l(k - 1, l - 1, 1, 0, t)));
    REQUIRE(wi.at(1, 0).coeff(-1) == -h3_k(k - 1, l, 1, 0, t));
    REQUIRE(wi.at(1, 1).coeff(0).is_zero());
    REQUIRE(wi.at(1, 1).coeff(-1) == RatFunc(1));
    REQUIRE(wi.at(1, 2).coeff(-1) == srk * h3_l(k - 1, l - 1, 1, 0, t).reciprocal());
    REQUIRE(wi.at(2, 0).coeff(-1) == -srk * h3_k(k - 1, l, 1, 0, t) * h3_l(k, l, 0, 0, t));
    REQUIRE(wi.at(2, 1).coeff(-1) == srk * h3_l(k, l, 0, 0, t));
    REQUIRE(wi.at(2, 2).coeff(0) == RatFunc(1));
    REQUIRE(wi.at(2, 2).coeff(-1) == h3_l(k, l, 0, 0, t) / h3_l(k - 1, l - 1, 1, 0, t));

    RatFunc ha = h3_kl(k - 1, l - 1, 0, 0, t);
    RatFunc hb = h3_l(k, l - 1, 0, 0, t);
    RatFunc hc = h3_kl(k, l - 1, 0, 1, t);
    RatFunc hd = h3_l(k, l - 1, 0, 1, t);
    FLoopMatrix li = connection3(Conn3Kind::LowerLRaiseBeta, k, l, 0, 0, t).inverse(1);
    REQUIRE(li.at(0, 0).coeff(0) == RatFunc(1));
    REQUIRE(li.at(0, 0).coeff(-1) == hc / ha);
    REQUIRE(li.at(0, 1).coeff(-1) == -(hd / ha));
    REQUIRE(li.at(0, 2).coeff(-1) == srk * ha.reciprocal());
    REQUIRE(li.at(1, 0).coeff(-1) == hc / hb);
    REQUIRE(li.at(1, 1).coeff(0) == RatFunc(1));
    REQUIRE(li.at(1, 1).coeff(-1) == -(hd / hb));
    REQUIRE(li.at(1, 2).coeff(-1) == srk * hb.reciprocal());
    REQUIRE(li.at(2, 0).coeff(-1) == srk * hc);
    REQUIRE(li.at(2, 1).coeff(-1) == -(srk * hd));
    REQUIRE(li.at(2, 2).coeff(0).is_zero());
    REQUIRE(li.at(2, 2).coeff(-1) == RatFunc(1));
  }
}

TEST_CASE("advance matrices agree along both factorization routes") {
  TauTable3 t(Window(-4, 4));
  for (auto [k, l, a, b] : {std::tuple{0, 0, 0, 0}, {1, 1, 0, 0}, {1, 0, 1, -1}}) {
    ZeroCurvature3 r = zero_curvature3_residual(k, l, a, b, t);
    FLoopMatrix mk = move_relation_residual_k(k, l, a, b, t);
    FLoopMatrix ml = move_relation_residual_l(k, l, a, b, t);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) {
        REQUIRE(r.k_step.at(i, j).is_exact_zero());
        REQUIRE(r.l_step.at(i, j).is_exact_zero());
        REQUIRE(mk.at(i, j).is_exact_zero());
        REQUIRE(ml.at(i, j).is_exact_zero());
      }
  }

  // the advance is polynomial in z; its first column carries the quotients
  for (auto [k, l] : {std::pair{1, 1}, {2, 1}}) {
    const RatFunc srk(k % 2 == 0 ? 1 : -1);
    FLoopMatrix u = connection_U_k(k, l, 0, 0, t);
    REQUIRE(negative_part_vanishes_to(u, 6));
    REQUIRE(u.at(1, 0).coeff(1).is_zero());
    REQUIRE(u.at(2, 0).coeff(1).is_zero());
    REQUIRE(u.at(1, 0).coeff(0) == -h3_k(k, l, 0, 0, t));
    REQUIRE(u.at(2, 0).coeff(0) == srk * h3_kl(k, l, 0, 0, t));
    REQUIRE(negative_part_vanishes_to(connection_U_l(k, l, 0, 0, t), 6));
  }
}

TEST_CASE("negative factor from tau has identity head and ratio tail") {
  Window win(-4, 4);
  TauTable3 t(win);
  // first-order shift references are taken on a wider window and clipped,
  // since shifting can pull a tau term from just left of the window back in
  Window wide(-7, 4);
  TauTable3 tw(wide);
  auto shift_ref = [&](const Poly& f, char fam, int sign) {
    return clip_to_window(partial_shift(f, fam, sign, 1, wide), win);
  };
  for (auto [k, l] : {std::pair{0, 0}, {1, 0}, {1, 1}, {2, 1}}) {
    const RatFunc srk(k % 2 == 0 ? 1 : -1);
    FLoopMatrix gm = g_minus_from_tau3(k, l, 0, 0, t, 3);
    const Poly& tau = t.tau(k, l, 0, 0);
    const Poly& tau_w = tw.tau(k, l, 0, 0);
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = 0; j < 3; ++j) {
        if (i == j)
          REQUIRE(gm.at(i, i).coeff(0) == RatFunc(1));
        else
          REQUIRE(gm.at(i, j).coeff(0).is_zero());
      }
    REQUIRE(gm.at(0, 1).coeff(-1) == RatFunc(t.tau(k - 1, l, 0, 0), tau));
    REQUIRE(gm.at(0, 2).coeff(-1) == srk * RatFunc(t.tau(k - 1, l - 1, 0, 0), tau));
    REQUIRE(gm.at(1, 0).coeff(-1) == RatFunc(t.tau(k + 1, l, 0, 0), tau));
    REQUIRE(gm.at(1, 2).coeff(-1) == srk * RatFunc(t.tau(k, l - 1, 0, 0), tau));
    REQUIRE(gm.at(2, 0).coeff(-1) == -srk * RatFunc(t.tau(k + 1, l + 1, 0, 0), tau));
    REQUIRE(gm.at(2, 1).coeff(-1) == srk * RatFunc(t.tau(k, l + 1, 0, 0), tau));
    REQUIRE(gm.at(0, 0).coeff(-1) ==
            RatFunc(shift_ref(tau_w, 'c', +1) + shift_ref(tau_w, 'd', +1), tau));
    REQUIRE(gm.at(1, 1).coeff(-1) ==
            RatFunc(shift_ref(tau_w, 'c', -1) + shift_ref(tau_w, 'e', +1), tau));
    REQUIRE(gm.at(2, 2).coeff(-1) ==
            RatFunc(shift_ref(tau_w, 'd', -1) + shift_ref(tau_w, 'e', -1), tau));

    // the inverse flips the sign of every z^-1 quotient
    FLoopMatrix gi = gm.inverse(1);
    REQUIRE(gi.at(0, 1).coeff(-1) == -RatFunc(t.tau(k - 1, l, 0, 0), tau));
    REQUIRE(gi.at(1, 0).coeff(-1) == -RatFunc(t.tau(k + 1, l, 0, 0), tau));
    REQUIRE(gi.at(2, 0).coeff(-1) == srk * RatFunc(t.tau(k + 1, l + 1, 0, 0), tau));
    REQUIRE(gi.at(2, 1).coeff(-1) == -srk * RatFunc(t.tau(k, l + 1, 0, 0), tau));
  }
  // deepening the expansion never disturbs the coefficients already reported
  REQUIRE(equal_down_to(g_minus_from_tau3(2, 1, 0, 0, t, 3), g_minus_from_tau3(2, 1, 0, 0, t, 5),
                        3));
  REQUIRE_THROWS_AS(g_minus_from_tau3(-1, 0, 0, 0, t, 2), std::invalid_argument);
  TauTable3 narrow(Window(0, 2));
  REQUIRE_THROWS_WITH(g_minus_from_tau3(1, 0, -3, 0, narrow, 2),
                      "tau function vanishes at this point");
}

TEST_CASE("tau formula solves the triple factorization symbolically") {
  Window win(-3, 3);
  for (auto [k, l] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}})
    for (auto [a, b] : {std::pair{0, 0}, {1, -1}, {-1, 1}}) {
      BirkhoffCheck check = verify_birkhoff3(k, l, a, b, win, 2);
      INFO(check.witness);
      REQUIRE(check.pass);
    }
}

TEST_CASE("tau formula matches the numeric factorization") {
  Window win(-3, 3);
  TauTable3 t(win);
  Rng rng(11);
  const int N = 6;
  for (auto [k, l, a, b] : {std::tuple{1, 1, 0, 0}, {2, 1, -1, 1}, {0, 2, 1, 0}}) {
    auto point = random_point(rng, win);
    FLoopMatrix gm = g_minus_from_tau3(k, l, a, b, t, N);
    QLoopMatrix gm_tau =
        map_entries<Rational>(gm, [&](const RatFunc& f) { return f.substitute(point); });
    QLoopMatrix m = substitute(build_g(GroupSpec{3, win, a, b, k, l}), point);
    BirkhoffFactors f = birkhoff_solve_numeric(m, N);
    REQUIRE(equal_down_to(gm_tau, f.g_minus, N - 1));
  }
}

TEST_CASE("wave matrices connect along the six lattice moves") {
  Window win(-3, 3);
  TauTable3 t(win);
  const int N = 8;
  for (auto [k, l, a, b] : {std::tuple{1, 1, 0, 0}, {1, 1, 1, -1}}) {
    BakerResiduals3 r = baker_relations_residual3(k, l, a, b, t, N);
    REQUIRE(equal_down_to(r.u_k, FLoopMatrix(3), 2));
    REQUIRE(equal_down_to(r.u_l, FLoopMatrix(3), 2));
    REQUIRE(equal_down_to(r.v_alpha, FLoopMatrix(3), 2));
    REQUIRE(equal_down_to(r.v_beta, FLoopMatrix(3), 2));
    REQUIRE(equal_down_to(r.w_alpha, FLoopMatrix(3), 2));
    REQUIRE(equal_down_to(r.w_beta, FLoopMatrix(3), 2));
  }

  // conjugating consecutive negative factors reproduces the advance matrix
  FLoopMatrix gk = g_minus_from_tau3(1, 1, 0, 0, t, 6);
  FLoopMatrix gk1 = g_minus_from_tau3(2, 1, 0, 0, t, 6);
  auto lift = [](const PLoopMatrix& m) {
    return map_entries<RatFunc>(m, [](const Poly& p) { return RatFunc(p); });
  };
  FLoopMatrix lhs = gk.inverse(4) * (lift(build_T(3, 1)) * gk1);
  REQUIRE(equal_down_to(lhs, connection_U_k(1, 1, 0, 0, t), 3));
}

TEST_CASE("one connection form covers any lattice displacement") {
  Window win(-3, 3);
  TauTable3 t(win);
  const int N = 8;
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 1, 1, 1, 0, t, N),
                        connection3(Conn3Kind::RaiseAlpha, 1, 1, 0, 0, t), 2));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 1, 1, 0, 1, t, N),
                        connection3(Conn3Kind::RaiseBeta, 1, 1, 0, 0, t), 2));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 0, 1, 1, 0, t, N),
                        connection3(Conn3Kind::LowerKRaiseAlpha, 1, 1, 0, 0, t), 2));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 1, 0, 0, 1, t, N),
                        connection3(Conn3Kind::LowerLRaiseBeta, 1, 1, 0, 0, t), 2));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 2, 1, 0, 0, t, N),
                        connection_U_k(1, 1, 0, 0, t), 2));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 1, 2, 0, 0, t, N),
                        connection_U_l(1, 1, 0, 0, t), 2));

  // a two-step displacement factors the same way through either route
  FLoopMatrix via_alpha = connection3(Conn3Kind::RaiseAlpha, 1, 1, 0, 0, t) *
                          connection3(Conn3Kind::RaiseBeta, 1, 1, 1, 0, t);
  FLoopMatrix via_beta = connection3(Conn3Kind::RaiseBeta, 1, 1, 0, 0, t) *
                         connection3(Conn3Kind::RaiseAlpha, 1, 1, 0, 1, t);
  REQUIRE(equal_down_to(via_alpha, via_beta, 4));
  REQUIRE(equal_down_to(connection_path3(1, 1, 0, 0, 1, 1, 1, 1, t, N), via_alpha, 2));
}

TEST_CASE("csv export is stable") {
  TauTable3 t(Window(-4, 4));
  REQUIRE(tau_table3_csv(t, -1, 0, -1, 0, 0, 0, 0, 0) ==
          "k,l,alpha,beta,tau\n"
          "-1,-1,0,0,\"0\"\n"
          "-1,0,0,0,\"0\"\n"
          "0,-1,0,0,\"0\"\n"
          "0,0,0,0,\"+1/1\"\n");
}
