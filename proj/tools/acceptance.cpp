#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "looptau/suites.hpp"

// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Ranges follow the suite defaults, which are the asserted ranges.

namespace {

using namespace looptau;

struct Gate {
  int number = 0;
  int failures = 0;

  template <typename Fn>
  void criterion(const std::string& label, Fn&& fn) {
    ++number;
    auto start = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    std::chrono::duration<double> sec = std::chrono::steady_clock::now() - start;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1fs", sec.count());
    std::cout << "criterion " << number << " " << label << ": " << (ok ? "PASS" : "FAIL")
              << note << " [" << timing << "]" << std::endl;
    if (!ok) ++failures;
  }
};

bool suite_clean(const SuiteReport& s) { return s.pass() && !s.cases.empty(); }

bool connection_determinants() {
  bool ok = true;
  TauTable2 t2(Window(-4, 4));
  for (int k = 0; k <= 3; ++k)
    for (int a = -1; a <= 1; ++a) {
      ConnectionMatrices2 cm = connection_matrices(k, a, t2);
      ok = ok && (cm.U.det() - FSeries(RatFunc(1))).is_exact_zero();
      ok = ok && (cm.V.det() - FSeries::z_pow(1)).is_exact_zero();
      ok = ok && (cm.W.det() - FSeries::z_pow(1)).is_exact_zero();
    }
  TauTable3 t3(Window(-4, 4));
  const Conn3Kind kinds[] = {Conn3Kind::RaiseAlpha, Conn3Kind::RaiseBeta,
                             Conn3Kind::LowerKRaiseAlpha, Conn3Kind::LowerLRaiseBeta};
  for (Conn3Kind kind : kinds)
    for (int k = 0; k <= 2; ++k)
      for (int l = 0; l <= 2; ++l) {
        if (kind == Conn3Kind::LowerKRaiseAlpha && k == 0) continue;
        if (kind == Conn3Kind::LowerLRaiseBeta && l == 0) continue;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            FLoopMatrix m = connection3(kind, k, l, a, b, t3);
            ok = ok && (m.det() - FSeries::z_pow(1)).is_exact_zero();
          }
      }
  return ok;
}

bool closed_forms_and_degrees() {
  Window w(-5, 5);
  TauTable3 t(w);
  bool ok = true;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      ok = ok && (t.tau(0, 0, a, b) - Poly(1)).is_zero();
      for (int k = 1; k <= 3; ++k) {
        ok = ok && (t.tau(k, 0, a, b) - hankel_tau('c', a - b, k, w)).is_zero();
        ok = ok && (t.tau(0, k, a, b) - hankel_tau('e', b, k, w)).is_zero();
      }
      ok = ok && (t.tau(1, 1, a, b) - closed_tau11(a, b, w)).is_zero();
      ok = ok && (t.tau(1, 2, a, b) - closed_tau12(a, b, w)).is_zero();
      ok = ok && (t.tau(2, 1, a, b) - closed_tau21(a, b, w)).is_zero();

      // Every summand of the residue composition carries the exact
      // per-family degrees.
      for (int k = 0; k <= 2; ++k)
        for (int l = 0; l <= 2; ++l)
          for (int r = 0; r <= std::min(k, l); ++r) {
            Poly p = residue_coeff(k - r, r, l - r, a, b, w);
            ok = ok && !p.is_zero();
            for (const auto& [m, c] : p.terms()) {
              ok = ok && m.degree_in_family('c') == k - r;
              ok = ok && m.degree_in_family('d') == r;
              ok = ok && m.degree_in_family('e') == l - r;
            }
          }
    }
  return ok;
}

fock::FockVector anticommutator(int a, int da, int ma, int b, int db, int mb,
                                const fock::FockVector& v) {
  fock::FockVector out = fock::apply_psi(a, da, ma, fock::apply_psi(b, db, mb, v));
  out += fock::apply_psi(b, db, mb, fock::apply_psi(a, da, ma, v));
  return out;
}

// Mode, pairing, and charge-shift relations, coefficientwise over the whole
// small two-component basis.
bool operator_relations_on_basis() {
  std::vector<fock::WedgeState> basis = fock::small_basis2(3);
  bool ok = !basis.empty();

  for (const fock::WedgeState& s : basis) {
    fock::FockVector v = fock::FockVector::unit(s);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int j = -3; j <= 2; ++j)
          for (int k = -3; k <= 2; ++k) {
            fock::FockVector pm = anticommutator(a, +1, j, b, -1, k, v);
            if (a == b && j + k == -1)
              ok = ok && pm == v;
            else
              ok = ok && pm.is_zero();
            if (b <= a && k <= j) {
              ok = ok && anticommutator(a, +1, j, b, +1, k, v).is_zero();
              ok = ok && anticommutator(a, -1, j, b, -1, k, v).is_zero();
            }
          }
    for (int a = 0; a < 2; ++a) {
      ok = ok && fock::apply_Q(a, -1, fock::apply_Q(a, +1, v)) == v;
      ok = ok && fock::apply_Q(a, +1, fock::apply_Q(a, -1, v)) == v;
    }
    ok = ok && fock::apply_Q(0, +1, fock::apply_Q(1, +1, v)) ==
                   fock::apply_Q(1, +1, fock::apply_Q(0, +1, v)).scaled(Rational(-1));
  }

  for (const fock::WedgeState& su : basis)
    for (const fock::WedgeState& sv : basis) {
      fock::FockVector u = fock::FockVector::unit(su);
      fock::FockVector v = fock::FockVector::unit(sv);
      for (int a = 0; a < 2; ++a) {
        for (int k = -3; k <= 2; ++k) {
          Poly lhs = fock::pairing(fock::apply_psi(a, +1, k, u), v);
          Poly rhs = fock::pairing(u, fock::apply_psi(a, -1, -k - 1, v));
          ok = ok && (lhs - rhs).is_zero();
        }
        Poly lhs = fock::pairing(fock::apply_Q(a, +1, u), v);
        Poly rhs = fock::pairing(u, fock::apply_Q(a, -1, v));
        ok = ok && (lhs - rhs).is_zero();
      }
    }
  return ok;
}

bool rewrite_suites_on_basis() {
  VerificationReport r = fock::identity_suites(7);
  for (const SuiteReport& s : r.suites)
    if (s.suite == "operator-rewrites") return suite_clean(s);
  return false;
}

}  // namespace

int main() {
  Gate gate;
  RunConfig cfg;

  gate.criterion("two-component lattice relation",
                 [&] { return suite_clean(suite_q_system(cfg)); });
  gate.criterion("minor-determinant recurrence",
                 [&] { return suite_clean(suite_desnanot_jacobi(cfg)); });
  gate.criterion("two-component factorization, symbolic and numeric and fermionic",
                 [&] { return suite_clean(suite_birkhoff_2(cfg)); });
  gate.criterion("connection determinants", [] { return connection_determinants(); });
  gate.criterion("zero curvature on both lattices", [&] {
    return suite_clean(suite_zero_curvature_2(cfg)) && suite_clean(suite_zero_curvature_3(cfg));
  });
  gate.criterion("three-component closed forms and summand degrees",
                 [] { return closed_forms_and_degrees(); });
  gate.criterion("three-component lattice relations and component equations", [&] {
    return suite_clean(suite_gl3_four(cfg)) && suite_clean(suite_gl3_components(cfg));
  });
  gate.criterion("fermionic matrix elements match both tau tables",
                 [&] { return suite_clean(suite_fock_cross(cfg)); });
  gate.criterion("correlation product formulas and factorization",
                 [&] { return suite_clean(suite_correlations(cfg)); });
  gate.criterion("determinant identity suites over fifty seeds", [] {
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
      if (!fock::identity_suites(seed, 5).pass()) return false;
    return true;
  });
  gate.criterion("operator identities on the small basis", [] {
    return operator_relations_on_basis() && rewrite_suites_on_basis();
  });
  gate.criterion("byte-identical reports", [&] {
    VerificationReport first = run_suites(suite_names(), cfg);
    VerificationReport second = run_suites(suite_names(), cfg);
    return report_to_json(first, cfg) == report_to_json(second, cfg) && first.pass();
  });

  std::cout << "acceptance: " << (12 - gate.failures) << "/12 criteria pass" << std::endl;
  return gate.failures == 0 ? 0 : 1;
}
