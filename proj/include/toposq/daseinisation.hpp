#pragma once

// Outer daseinisation: the least projection of a context dominating a given
// projection, and the clopen subobject it induces over the whole presheaf.

#include <cstddef>
#include <vector>

#include "toposq/subobjects.hpp"

namespace toposq {

/// Atoms a of V with aP != 0. Q >= P iff (1 - Q)P = 0, so these atoms form
/// the least block of V above P.
inline Mask daseinisation_mask(const Projection& p, const Context& v, const Tolerances& tol = {}) {
  check_same_dim(p.dim(), v.dim());
  Mask m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (max_abs(v.atom(i).matrix() * p.matrix()) > tol.num) m |= Mask{1} << i;
  }
  return m;
}

inline Projection daseiniseAt(const Projection& p, const Context& v, const Tolerances& tol = {}) {
  return v.block(daseinisation_mask(p, v, tol));
}

inline ClopenSubobject daseinise(const Projection& p, const PresheafPtr& sigma) {
  check_same_dim(p.dim(), sigma->poset().dim());
  std::vector<Mask> comps(sigma->size());
  for (std::size_t v = 0; v < comps.size(); ++v) {
    comps[v] = daseinisation_mask(p, sigma->context(v), sigma->tolerances());
  }
  return ClopenSubobject::from_components(sigma, std::move(comps));
}

/// Whether each restriction of delta(P)_V equals delta(P)_{V'} rather than
/// merely being contained in it. Reported, not required.
inline bool restriction_equality_holds(const ClopenSubobject& s) {
  const auto& sigma = *s.presheaf();
  for (auto [lower, upper] : sigma.poset().arrows()) {
    if (sigma.restrict_mask(s.component(upper), upper, lower) != s.component(lower)) return false;
  }
  return true;
}

}  // namespace toposq
