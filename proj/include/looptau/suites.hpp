#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "looptau/fock.hpp"
#include "looptau/loopgroup.hpp"
#include "looptau/report.hpp"
#include "looptau/rng.hpp"
#include "looptau/tau_gl2.hpp"
#include "looptau/tau_gl3.hpp"

// Named verification suites behind the batch driver. Every suite builds its
// own tables, so suites can run on separate workers; case order inside a
// suite is a fixed enumeration, never completion order.
namespace looptau {

struct RunConfig {
  std::optional<Window> window;
  std::optional<int> k_max;
  std::optional<int> l_max;
  std::optional<std::pair<int, int>> alpha;
  std::optional<std::pair<int, int>> beta;
  std::optional<int> trunc;     // series depth for factorization checks
  std::optional<int> order;     // expansion order for correlation checks
  std::optional<int> max_size;  // size cap for the determinant suites
  std::uint64_t seed = 7;
};

namespace detail {

inline std::string poly_witness(const Poly& p) {
  auto it = p.lex_lead();
  return rational_string(it->second) + "*" + it->first.str();
}

inline CaseResult poly_case(std::string params, const Poly& residual) {
  CaseResult c;
  c.params = std::move(params);
  c.pass = residual.is_zero();
  c.residual_terms = static_cast<long>(residual.terms().size());
  if (!c.pass) c.witness = poly_witness(residual);
  return c;
}

inline CaseResult matrix_zero_case(std::string params, const FLoopMatrix& m, int depth) {
  CaseResult c;
  c.params = std::move(params);
  c.truncation = depth;
  c.pass = true;
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m.size(); ++j)
      for (const auto& [e, coeff] : m.at(i, j).terms()) {
        if (e < -depth || coeff.is_zero()) continue;
        ++c.residual_terms;
        if (c.pass) {
          c.pass = false;
          std::ostringstream os;
          os << "entry (" << i << "," << j << ") at z^" << e << ": " << coeff.str();
          c.witness = os.str();
        }
      }
  return c;
}

inline std::map<VarId, Rational> random_point(Rng& rng, const Window& w,
                                              const std::vector<char>& families) {
  std::map<VarId, Rational> out;
  for (char fam : families)
    for (int i = w.lo; i <= w.hi; ++i) out[VarId{fam, i}] = rng.nonzero_rational(5, 4);
  return out;
}

inline std::string kv(const char* k, int v) {
  return std::string(k) + "=" + std::to_string(v);
}

}  // namespace detail

// Two-component quadratic difference relation on the lattice box.
inline SuiteReport suite_q_system(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-6, 8));
  int kmax = cfg.k_max.value_or(3);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-2, 2});
  TauTable2 t(w);
  SuiteReport s{"q-system", {}};
  for (int k = 0; k <= kmax; ++k)
    for (int a = alo; a <= ahi; ++a)
      s.cases.push_back(detail::poly_case(detail::kv("k", k) + " " + detail::kv("alpha", a),
                                          qsystem_residual(k, a, t)));
  return s;
}

// Minor-determinant recurrence between consecutive table sizes.
inline SuiteReport suite_desnanot_jacobi(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-6, 8));
  int kmax = cfg.k_max.value_or(4);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-2, 2});
  TauTable2 t(w);
  SuiteReport s{"desnanot-jacobi", {}};
  for (int k = 2; k <= kmax; ++k)
    for (int a = alo; a <= ahi; ++a)
      s.cases.push_back(detail::poly_case(detail::kv("k", k) + " " + detail::kv("alpha", a),
                                          desnanot_jacobi_residual(k, a, t)));
  return s;
}

// Both routes around a lattice square multiply to the same advance matrix.
inline SuiteReport suite_zero_curvature_2(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-4, 4));
  int kmax = cfg.k_max.value_or(2);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  TauTable2 t(w);
  SuiteReport s{"zero-curvature-2", {}};
  for (int k = 0; k <= kmax; ++k)
    for (int a = alo; a <= ahi; ++a)
      s.cases.push_back(
          detail::matrix_zero_case(detail::kv("k", k) + " " + detail::kv("alpha", a),
                                   zero_curvature_residual(k, a, t), 2));
  return s;
}

// Factorization of the two-component group element: symbolic negative-part
// vanishing, agreement with the linear-system solver at random points, and
// agreement with the fermionic matrix elements.
inline SuiteReport suite_birkhoff_2(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-4, 4));
  int kmax = cfg.k_max.value_or(2);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  int N = cfg.trunc.value_or(5);
  SuiteReport s{"birkhoff-2", {}};

  for (int k = 0; k <= kmax; ++k)
    for (int a = alo; a <= ahi; ++a) {
      BirkhoffCheck check = verify_birkhoff2(k, a, w, N);
      CaseResult c;
      c.params = "symbolic " + detail::kv("k", k) + " " + detail::kv("alpha", a);
      c.truncation = N;
      c.pass = check.pass;
      c.witness = check.witness;
      if (!check.pass) c.residual_terms = 1;
      s.cases.push_back(std::move(c));
    }

  TauTable2 t(w);
  Rng rng(cfg.seed);
  const int numeric_N = 6;
  for (int rep = 0; rep < 20; ++rep) {
    int k = rep % (kmax + 1);
    int a = alo + rep % (ahi - alo + 1);
    auto point = detail::random_point(rng, w, {'c'});
    FLoopMatrix gm = g_minus_from_tau(k, a, t, numeric_N);
    QLoopMatrix from_tau =
        map_entries<Rational>(gm, [&](const RatFunc& f) { return f.substitute(point); });
    BirkhoffFactors solved =
        birkhoff_solve_numeric(substitute(build_g(GroupSpec{2, w, a, 0, k, 0}), point), numeric_N);
    CaseResult c;
    c.params = "numeric rep=" + std::to_string(rep) + " " + detail::kv("k", k) + " " +
               detail::kv("alpha", a);
    c.truncation = numeric_N;
    c.pass = equal_down_to(from_tau, solved.g_minus, numeric_N - 1);
    if (!c.pass) {
      c.residual_terms = 1;
      c.witness = "solver and tau formula disagree at this point";
    }
    s.cases.push_back(std::move(c));
  }

  for (int k = 0; k <= std::min(kmax, 2); ++k)
    for (int a = alo; a <= ahi; ++a) {
      int depth = 3;
      FLoopMatrix diff = g_minus_from_tau(k, a, t, depth) -
                         fock::birkhoff_negative_fock2(k, a, w, depth);
      s.cases.push_back(detail::matrix_zero_case(
          "fermionic " + detail::kv("k", k) + " " + detail::kv("alpha", a), diff, depth));
    }
  return s;
}

// The four scalar difference equations of the three-component lattice.
inline SuiteReport suite_gl3_four(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-5, 5));
  int kmax = cfg.k_max.value_or(2);
  int lmax = cfg.l_max.value_or(2);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  auto [blo, bhi] = cfg.beta.value_or(std::pair{-1, 1});
  TauTable3 t(w);
  SuiteReport s{"gl3-four", {}};
  struct Eq {
    const char* name;
    Poly (*fn)(int, int, int, int, const TauTable3&);
  };
  const Eq eqs[] = {{"three-term-alpha", three_term_alpha_residual},
                    {"three-term-beta", three_term_beta_residual},
                    {"qsystem-alpha", qsystem3_alpha_residual},
                    {"qsystem-beta", qsystem3_beta_residual}};
  for (const Eq& eq : eqs)
    for (int k = 0; k <= kmax; ++k)
      for (int l = 0; l <= lmax; ++l)
        for (int a = alo; a <= ahi; ++a)
          for (int b = blo; b <= bhi; ++b)
            s.cases.push_back(detail::poly_case(
                std::string("eq=") + eq.name + " " + detail::kv("k", k) + " " +
                    detail::kv("l", l) + " " + detail::kv("alpha", a) + " " + detail::kv("beta", b),
                eq.fn(k, l, a, b, t)));
  return s;
}

// The six polynomial component equations of the two advance relations.
inline SuiteReport suite_gl3_components(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-5, 5));
  int kmax = cfg.k_max.value_or(1);
  int lmax = cfg.l_max.value_or(1);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  auto [blo, bhi] = cfg.beta.value_or(std::pair{-1, 1});
  TauTable3 t(w);
  SuiteReport s{"gl3-components", {}};
  struct Eq {
    const char* name;
    int row, col;
    bool k_dir;
  };
  const Eq eqs[] = {{"k-00", 0, 0, true},  {"k-02", 0, 2, true},  {"k-20", 2, 0, true},
                    {"l-11", 1, 1, false}, {"l-10", 1, 0, false}, {"l-01", 0, 1, false}};
  for (const Eq& eq : eqs)
    for (int k = 0; k <= kmax; ++k)
      for (int l = 0; l <= lmax; ++l)
        for (int a = alo; a <= ahi; ++a)
          for (int b = blo; b <= bhi; ++b) {
            Poly r = eq.k_dir ? curvature_component_residual_k(eq.row, eq.col, k, l, a, b, t)
                              : curvature_component_residual_l(eq.row, eq.col, k, l, a, b, t);
            s.cases.push_back(detail::poly_case(
                std::string("eq=") + eq.name + " " + detail::kv("k", k) + " " +
                    detail::kv("l", l) + " " + detail::kv("alpha", a) + " " + detail::kv("beta", b),
                r));
          }
  return s;
}

// Matrix zero-curvature relations of the three-component lattice.
inline SuiteReport suite_zero_curvature_3(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-4, 4));
  int kmax = cfg.k_max.value_or(1);
  int lmax = cfg.l_max.value_or(1);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  auto [blo, bhi] = cfg.beta.value_or(std::pair{-1, 1});
  TauTable3 t(w);
  SuiteReport s{"zero-curvature-3", {}};
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; l <= lmax; ++l)
      for (int a = alo; a <= ahi; ++a)
        for (int b = blo; b <= bhi; ++b) {
          ZeroCurvature3 r = zero_curvature3_residual(k, l, a, b, t);
          std::string base = detail::kv("k", k) + " " + detail::kv("l", l) + " " +
                             detail::kv("alpha", a) + " " + detail::kv("beta", b);
          s.cases.push_back(detail::matrix_zero_case("step=k " + base, r.k_step, 2));
          s.cases.push_back(detail::matrix_zero_case("step=l " + base, r.l_step, 2));
        }
  return s;
}

// Factorization of the three-component group element.
inline SuiteReport suite_birkhoff_3(const RunConfig& cfg) {
  Window w = cfg.window.value_or(Window(-4, 4));
  int kmax = cfg.k_max.value_or(1);
  int lmax = cfg.l_max.value_or(1);
  int N = cfg.trunc.value_or(3);
  const std::pair<int, int> shifts[] = {{0, 0}, {1, 0}, {0, -1}, {1, -1}};
  SuiteReport s{"birkhoff-3", {}};
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; l <= lmax; ++l)
      for (auto [a, b] : shifts) {
        BirkhoffCheck check = verify_birkhoff3(k, l, a, b, w, N);
        CaseResult c;
        c.params = detail::kv("k", k) + " " + detail::kv("l", l) + " " + detail::kv("alpha", a) +
                   " " + detail::kv("beta", b);
        c.truncation = N;
        c.pass = check.pass;
        c.witness = check.witness;
        if (!check.pass) c.residual_terms = 1;
        s.cases.push_back(std::move(c));
      }
  return s;
}

// Vacuum matrix elements against both symbolic tau constructions.
inline SuiteReport suite_fock_cross(const RunConfig& cfg) {
  int kmax = cfg.k_max.value_or(3);
  auto [alo, ahi] = cfg.alpha.value_or(std::pair{-1, 1});
  auto [blo, bhi] = cfg.beta.value_or(std::pair{-1, 1});
  SuiteReport s{"fock-cross", {}};

  std::vector<Window> windows;
  if (cfg.window)
    windows.push_back(*cfg.window);
  else {
    windows.push_back(Window(-3, 3));
    windows.push_back(Window(-4, 4));
  }
  for (const Window& w : windows) {
    TauTable2 t(w);
    for (int k = -1; k <= kmax; ++k)
      for (int a = alo; a <= ahi; ++a) {
        Poly diff = fock::tau_via_fock(2, k, 0, a, 0, w, kmax) - t.tau(k, a);
        s.cases.push_back(detail::poly_case("n=2 window=" + w.str() + " " + detail::kv("k", k) +
                                                " " + detail::kv("alpha", a),
                                            diff));
      }
  }

  Window w3 = cfg.window.value_or(Window(-3, 3));
  TauTable3 t3(w3);
  int budget = std::min(kmax, 3);
  for (int k = 0; k <= budget; ++k)
    for (int l = 0; k + l <= budget; ++l)
      for (int a = alo; a <= ahi; ++a)
        for (int b = blo; b <= bhi; ++b) {
          Poly diff = fock::tau_via_fock(3, k, l, a, b, w3, budget) - t3.tau(k, l, a, b);
          s.cases.push_back(detail::poly_case(
              "n=3 " + detail::kv("k", k) + " " + detail::kv("l", l) + " " +
                  detail::kv("alpha", a) + " " + detail::kv("beta", b),
              diff));
        }
  return s;
}

// Field correlation functions against their product formulas, plus the
// factorization of multi-component elements.
inline SuiteReport suite_correlations(const RunConfig& cfg) {
  int M = cfg.order.value_or(6);
  int mn = std::min(cfg.max_size.value_or(3), 3);
  SuiteReport s{"correlations", {}};

  for (int dir : {+1, -1})
    for (int count = 1; count <= 3; ++count) {
      fock::CorrelationPP c = fock::correlation_pp(count, dir);
      CaseResult r;
      r.params = "same-species " + detail::kv("count", count) + " " + detail::kv("dir", dir);
      Poly diff = c.lhs - c.rhs;
      r.pass = diff.is_zero();
      r.residual_terms = static_cast<long>(diff.terms().size());
      if (!r.pass) r.witness = detail::poly_witness(diff);
      s.cases.push_back(std::move(r));
    }

  auto laurent_case = [](std::string params, const fock::CorrelationCheck& c) {
    CaseResult r;
    r.params = std::move(params);
    r.truncation = c.truncation;
    r.pass = c.match();
    if (!r.pass) {
      r.residual_terms = 1;
      r.witness = c.witness();
    }
    return r;
  };
  for (int m = 0; m <= mn; ++m)
    for (int n = 0; n <= mn; ++n)
      s.cases.push_back(laurent_case(
          "mixed " + detail::kv("m", m) + " " + detail::kv("n", n),
          fock::correlation_mn(m, n, M)));
  for (int m = 0; m <= mn; ++m)
    for (int n = 0; n <= mn; ++n)
      s.cases.push_back(laurent_case(
          "extra-field " + detail::kv("m", m) + " " + detail::kv("n", n),
          fock::correlation_extra(m, n, M)));

  struct Named {
    const char* name;
    std::vector<fock::ComponentFields> mono;
  };
  std::vector<Named> monos;
  monos.push_back({"single-empty", {fock::ComponentFields{}}});
  {
    std::vector<fock::ComponentFields> pair(2);
    pair[0].minus = {{'y', 1}};
    pair[1].plus = {{'w', 1}};
    monos.push_back({"two-component-pair", std::move(pair)});
  }
  {
    std::vector<fock::ComponentFields> crossed(2);
    crossed[0].plus = {{'w', 2}};
    crossed[0].minus = {{'y', 1}};
    crossed[1].plus = {{'w', 1}};
    crossed[1].minus = {{'y', 2}};
    monos.push_back({"two-component-crossed", std::move(crossed)});
  }
  {
    std::vector<fock::ComponentFields> triple(3);
    triple[0].minus = {{'y', 1}};
    triple[1].plus = {{'w', 1}};
    triple[2].plus = {{'w', 2}};
    monos.push_back({"three-component", std::move(triple)});
  }
  for (const Named& named : monos) {
    fock::FactorizationCheck c = fock::factorization_check(named.mono, 4);
    CaseResult r;
    r.params = std::string("factorization ") + named.name;
    r.truncation = 4;
    r.pass = c.match();
    if (!r.pass) {
      r.residual_terms = 1;
      r.witness = c.factor_match ? "single-component reduction differs"
                                 : fock::Laurent::first_diff(c.joint, c.product);
    }
    s.cases.push_back(std::move(r));
  }
  return s;
}

// Determinant evaluations and operator rewrites, flattened from the
// individual identity families.
inline SuiteReport suite_det_identities(const RunConfig& cfg) {
  VerificationReport inner = fock::identity_suites(cfg.seed, cfg.max_size.value_or(5));
  SuiteReport s{"det-identities", {}};
  for (const auto& sub : inner.suites)
    for (const auto& c : sub.cases) {
      CaseResult copy = c;
      copy.params = sub.suite + " " + c.params;
      s.cases.push_back(std::move(copy));
    }
  return s;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "q-system",       "desnanot-jacobi", "zero-curvature-2", "birkhoff-2",
      "gl3-four",       "gl3-components",  "zero-curvature-3", "birkhoff-3",
      "fock-cross",     "correlations",    "det-identities"};
  return names;
}

inline SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
  if (name == "q-system") return suite_q_system(cfg);
  if (name == "desnanot-jacobi") return suite_desnanot_jacobi(cfg);
  if (name == "zero-curvature-2") return suite_zero_curvature_2(cfg);
  if (name == "birkhoff-2") return suite_birkhoff_2(cfg);
  if (name == "gl3-four") return suite_gl3_four(cfg);
  if (name == "gl3-components") return suite_gl3_components(cfg);
  if (name == "zero-curvature-3") return suite_zero_curvature_3(cfg);
  if (name == "birkhoff-3") return suite_birkhoff_3(cfg);
  if (name == "fock-cross") return suite_fock_cross(cfg);
  if (name == "correlations") return suite_correlations(cfg);
  if (name == "det-identities") return suite_det_identities(cfg);
  throw std::invalid_argument("unknown suite: " + name);
}

// Dispatches whole suites to workers; the report keeps request order
// regardless of completion order. on_done, if set, receives each finished
// suite's name and wall time in milliseconds (calls may come from any
// worker, serialized by an internal lock).
inline VerificationReport run_suites(
    const std::vector<std::string>& names, const RunConfig& cfg, int workers = 1,
    const std::function<void(const std::string&, double)>& on_done = {}) {
  VerificationReport report;
  report.suites.resize(names.size());
  std::mutex done_lock;
  auto run_one = [&](size_t i) {
    auto start = std::chrono::steady_clock::now();
    report.suites[i] = run_suite(names[i], cfg);
    if (on_done) {
      std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
      std::lock_guard<std::mutex> hold(done_lock);
      on_done(names[i], ms.count());
    }
  };
  if (workers <= 1) {
    for (size_t i = 0; i < names.size(); ++i) run_one(i);
    return report;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= names.size()) return;
      try {
        run_one(i);
      } catch (...) {
        std::lock_guard<std::mutex> hold(failure_lock);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(workers, static_cast<int>(names.size()));
  for (int i = 0; i < count; ++i) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return report;
}

// Reports carry no wall times so that reruns with the same configuration
// and seed stay byte-identical.
inline std::string report_to_json(const VerificationReport& report, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = cfg.seed;
  j["pass"] = report.pass();
  j["suites"] = nlohmann::ordered_json::array();
  for (const auto& s : report.suites) {
    nlohmann::ordered_json js;
    js["suite"] = s.suite;
    js["pass"] = s.pass();
    js["cases"] = nlohmann::ordered_json::array();
    for (const auto& c : s.cases) {
      nlohmann::ordered_json jc;
      jc["params"] = c.params;
      jc["pass"] = c.pass;
      jc["residual_terms"] = c.residual_terms;
      jc["truncation"] = c.truncation;
      jc["witness"] = c.witness;
      js["cases"].push_back(std::move(jc));
    }
    j["suites"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

inline std::string csv_quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string report_to_csv(const VerificationReport& report) {
  std::string out = "suite,params,pass,residual_terms,truncation,witness\n";
  for (const auto& s : report.suites)
    for (const auto& c : s.cases) {
      out += s.suite;
      out += ',';
      out += csv_quoted(c.params);
      out += ',';
      out += c.pass ? '1' : '0';
      out += ',';
      out += std::to_string(c.residual_terms);
      out += ',';
      out += std::to_string(c.truncation);
      out += ',';
      out += csv_quoted(c.witness);
      out += '\n';
    }
  return out;
}

}  // namespace looptau
