#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace looptau {

// One verified instance: the parameter tuple, the pass flag, and on failure
// the first nonvanishing witness term. residual_terms counts the monomials
// left standing in whatever difference the case computed; truncation records
// the expansion depth when the case is a truncated comparison.
struct CaseResult {
  std::string params;
  bool pass = true;
  std::string witness;
  long residual_terms = 0;
  int truncation = 0;
};

struct SuiteReport {
  std::string suite;
  std::vector<CaseResult> cases;

  bool pass() const {
    for (const auto& c : cases)
      if (!c.pass) return false;
    return true;
  }

  std::size_t failures() const {
    std::size_t f = 0;
    for (const auto& c : cases)
      if (!c.pass) ++f;
    return f;
  }
};

struct VerificationReport {
  std::vector<SuiteReport> suites;

  bool pass() const {
    for (const auto& s : suites)
      if (!s.pass()) return false;
    return true;
  }
};

}  // namespace looptau
