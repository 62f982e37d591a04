#pragma once

#include <set>
#include <stdexcept>
#include <vector>

#include "looptau/poly.hpp"
#include "looptau/series.hpp"
#include "looptau/window.hpp"

namespace looptau {

// One shift field S^+(z) or S^-(z) acting on a single variable family.
// Variables indexed outside the window are identified with zero, which is
// what keeps the minus field's geometric expansion finite in practice.
struct ShiftSpec {
  char family;
  int sign;   // +1 or -1
  int trunc;  // expansion depth N for sign -1 (ignored for sign +1)
  Window window;
};

// S^alpha on polynomials: translate every index of the family by alpha.
// A monomial with no variable of the family is annihilated (S^alpha(1) = 0);
// a variable sitting or landing outside the window kills its monomial.
inline Poly shift_power(const Poly& f, char family, int alpha, const Window& window) {
  Poly out;
  for (const auto& [m, coef] : f.terms()) {
    bool has_family = false, dead = false;
    Monomial img;
    for (const auto& [v, e] : m.factors()) {
      if (v.family == family) {
        has_family = true;
        if (!window.contains(v.index) || !window.contains(v.index + alpha)) {
          dead = true;
          break;
        }
        img = img * Monomial::var(VarId{family, v.index + alpha}, e);
      } else {
        img = img * Monomial::var(v, e);
      }
    }
    if (dead || !has_family) continue;
    out.add_term(img, coef);
  }
  return out;
}

namespace detail {

// Image of the generator x_k under one shift field.
inline PSeries shift_generator_image(int k, const ShiftSpec& spec) {
  if (!spec.window.contains(k)) return PSeries();
  if (spec.sign > 0) {
    PSeries img(Poly::var(spec.family, k));
    if (spec.window.contains(k + 1))
      img.set_coeff(-1, -Poly::var(spec.family, k + 1));
    return img;
  }
  bool exhausted = k + spec.trunc >= spec.window.hi;
  PSeries img = exhausted ? PSeries() : PSeries::with_trunc(spec.trunc);
  for (int n = 0; n <= spec.trunc; ++n)
    if (spec.window.contains(k + n)) img.set_coeff(-n, Poly::var(spec.family, k + n));
  return img;
}

}  // namespace detail

// Multiplicative extension of the shift field: each generator of the family
// is replaced by its series image, everything else passes through.
inline PSeries shift_field_apply(const Poly& f, const ShiftSpec& spec) {
  PSeries out;
  for (const auto& [m, coef] : f.terms()) {
    PSeries term{Poly(coef)};
    for (const auto& [v, e] : m.factors()) {
      if (v.family == spec.family) {
        PSeries gen = detail::shift_generator_image(v.index, spec);
        for (int i = 0; i < e; ++i) term *= gen;
      } else {
        term = term.scaled(Poly::var(v, e));
      }
    }
    out += term;
  }
  return out;
}

// Field applied coefficientwise to a series (used to stack fields of
// different families on one object).
inline PSeries shift_field_apply(const PSeries& s, const ShiftSpec& spec) {
  PSeries out = PSeries::with_trunc(s.trunc());
  for (const auto& [e, p] : s.terms()) out += shift_field_apply(p, spec).shifted(e);
  return out;
}

inline PSeries compose_fields(const Poly& f, const std::vector<ShiftSpec>& specs) {
  std::set<char> families;
  for (const auto& sp : specs)
    if (!families.insert(sp.family).second)
      throw std::invalid_argument("compose_fields: duplicate family");
  PSeries out{f};
  for (const auto& sp : specs) out = shift_field_apply(out, sp);
  return out;
}

// Partial shift S^[n]: the z^-n coefficient of the field applied to f.
inline Poly partial_shift(const Poly& f, char family, int sign, int n, const Window& window) {
  ShiftSpec spec{family, sign, n, window};
  return shift_field_apply(f, spec).coeff(-n);
}

// Restriction to a window: terms touching any outside index are dropped.
// Shift images computed on a wider index range are reduced with this, since
// shifts can move an index from outside the target window back inside.
inline Poly clip_to_window(const Poly& f, const Window& window) {
  Poly out;
  for (const auto& [m, coef] : f.terms()) {
    bool dead = false;
    for (const auto& [v, e] : m.factors())
      if (!window.contains(v.index)) {
        dead = true;
        break;
      }
    if (!dead) out.add_term(m, coef);
  }
  return out;
}

inline PSeries clip_to_window(const PSeries& s, const Window& window) {
  PSeries out = PSeries::with_trunc(s.trunc());
  for (const auto& [e, p] : s.terms()) out.set_coeff(e, clip_to_window(p, window));
  return out;
}

}  // namespace looptau
