#pragma once

// Truth values from pure states: pseudo-states, truth objects, the sieve-valued
// assignment v(w_psi <= S), and the search for global sections of the spectral
// presheaf (their absence is the Kochen-Specker obstruction).

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "toposq/daseinisation.hpp"

namespace toposq {

/// A global element of the sieve presheaf: one sieve per context.
struct TruthValue {
  std::vector<Sieve> per_context;

  const Sieve& at(std::size_t v) const { return per_context.at(v); }
  friend bool operator==(const TruthValue&, const TruthValue&) = default;
};

inline TruthValue totally_true(const ContextPoset& poset) {
  TruthValue t;
  for (std::size_t v = 0; v < poset.size(); ++v) t.per_context.push_back(principalSieve(poset, v));
  return t;
}

inline TruthValue totally_false(const ContextPoset& poset) {
  TruthValue t;
  for (std::size_t v = 0; v < poset.size(); ++v) t.per_context.push_back(emptySieve(poset, v));
  return t;
}

/// gamma_V intersected with the down-set of V' equals gamma_{V'} for all V' <= V.
inline bool is_global_element(const ContextPoset& poset, const TruthValue& t) {
  if (t.per_context.size() != poset.size()) return false;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    if (t.at(v).base != v || !is_sieve(poset, t.at(v))) return false;
    for (std::size_t w : poset.down_set(v)) {
      if (sieveIntersectDown(poset, t.at(v), w) != t.at(w)) return false;
    }
  }
  return true;
}

inline bool truth_leq(const TruthValue& a, const TruthValue& b) {
  for (std::size_t v = 0; v < a.per_context.size(); ++v) {
    if (!sieve_leq(a.at(v), b.at(v))) return false;
  }
  return true;
}

inline TruthValue truth_meet(const TruthValue& a, const TruthValue& b) {
  TruthValue out = a;
  for (std::size_t v = 0; v < out.per_context.size(); ++v) {
    auto& m = out.per_context[v].members;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] && b.at(v).members[i];
  }
  return out;
}

inline TruthValue truth_join(const TruthValue& a, const TruthValue& b) {
  TruthValue out = a;
  for (std::size_t v = 0; v < out.per_context.size(); ++v) {
    auto& m = out.per_context[v].members;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = m[i] || b.at(v).members[i];
  }
  return out;
}

/// w_psi = delta(P_psi), the least subobject totally true in psi.
inline ClopenSubobject pseudoState(const PureState& psi, const PresheafPtr& sigma) {
  return daseinise(psi.projector(), sigma);
}

namespace detail {
inline bool dominates_state(const PureState& psi, const Projection& p, const Tolerances& tol) {
  return bornProbability(psi, p) >= 1.0 - tol.num;
}
}  // namespace detail

/// Subsets S of the spectrum of V with alpha^{-1}(S) >= P_psi, i.e. <psi|P_S|psi> = 1.
inline std::vector<Mask> truthObjectComponent(const PureState& psi, const Context& v, const Tolerances& tol = {}) {
  check_same_dim(psi.dim(), v.dim());
  if (v.size() >= 64) throw Error(ErrorCode::Capacity, "context too large to enumerate its clopen subsets");
  std::vector<Mask> out;
  for (Mask s = 0; s <= full_mask(v.size()); ++s) {
    if (detail::dominates_state(psi, alphaInverse(v, s), tol)) out.push_back(s);
  }
  return out;
}

/// Image of truth-object members at V under S_P -> S_{delta(P)_{V'}}.
inline std::vector<Mask> truthObjectRestrict(const SpectralPresheaf& sigma, const std::vector<Mask>& members,
                                             std::size_t upper, std::size_t lower) {
  if (!sigma.poset().leq(lower, upper)) {
    throw Error(ErrorCode::NotBelow, "'" + sigma.context(lower).id() + "' is not below '" +
                                         sigma.context(upper).id() + "'");
  }
  std::vector<Mask> out;
  for (Mask s : members) {
    const Projection p = alphaInverse(sigma.context(upper), s);
    out.push_back(daseinisation_mask(p, sigma.context(lower), sigma.tolerances()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// S lies in the filter above the pseudo-state.
inline bool isTotallyTrue(const ClopenSubobject& s, const PureState& psi) {
  return leq(pseudoState(psi, s.presheaf()), s);
}

/// perContext(V) = { V' <= V : w_psi_{V'} subset of S_{V'} }.
inline TruthValue truthValue(const PureState& psi, const ClopenSubobject& s) {
  const auto& sigma = *s.presheaf();
  const auto& poset = sigma.poset();
  const ClopenSubobject w = pseudoState(psi, s.presheaf());
  std::vector<bool> local(poset.size());
  for (std::size_t v = 0; v < poset.size(); ++v) local[v] = (w.component(v) & ~s.component(v)) == 0;

  TruthValue t;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    Sieve sieve = emptySieve(poset, v);
    for (std::size_t w2 = 0; w2 < poset.size(); ++w2) sieve.members[w2] = poset.leq(w2, v) && local[w2];
    t.per_context.push_back(std::move(sieve));
  }
  return t;
}

/// The intersection over all contexts of the ranges of alpha^{-1}(S_V).
/// A state makes S totally true iff it lies in this subspace, so S can be
/// made totally true by some state iff the result is nonzero.
inline Projection totally_true_subspace(const ClopenSubobject& s) {
  const auto& sigma = *s.presheaf();
  const Tolerances& tol = sigma.tolerances();
  Projection acc = Projection::identity(sigma.poset().dim());
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    acc = projectionMeet(acc, alphaInverse(sigma.context(v), s.component(v)), tol);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Global sections

/// A global section: one character (atom index) per context, compatible with
/// every restriction map.
using GlobalSection = std::vector<std::size_t>;

namespace detail {

// Depth-first over contexts in canonical order (descending atom count), with
// forced restrictions propagated downward. Calls `visit` on each section in
// lexicographic order; stops when it returns false.
template <class Visit>
void search_sections(const SpectralPresheaf& sigma, Visit&& visit) {
  const auto& poset = sigma.poset();
  const std::size_t n = poset.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> choice(n, kUnset);
  bool keep_going = true;

  auto recurse = [&](auto&& self, std::size_t v) -> void {
    if (!keep_going) return;
    if (v == n) {
      keep_going = visit(static_cast<const GlobalSection&>(choice));
      return;
    }
    if (choice[v] != kUnset) {
      self(self, v + 1);
      return;
    }
    const auto below = poset.down_set(v);
    for (std::size_t lambda = 0; lambda < sigma.spectrum_size(v) && keep_going; ++lambda) {
      std::vector<std::size_t> assigned;
      bool consistent = true;
      for (std::size_t w : below) {
        const std::size_t r = w == v ? lambda : poset.atom_map(w, v)[lambda];
        if (choice[w] == kUnset) {
          choice[w] = r;
          assigned.push_back(w);
        } else if (choice[w] != r) {
          consistent = false;
          break;
        }
      }
      if (consistent) self(self, v + 1);
      for (std::size_t w : assigned) choice[w] = kUnset;
    }
  };
  recurse(recurse, 0);
}

}  // namespace detail

/// Lexicographically least global section (over canonical context order), if any.
inline std::optional<GlobalSection> globalSectionSearch(const SpectralPresheaf& sigma) {
  std::optional<GlobalSection> found;
  detail::search_sections(sigma, [&](const GlobalSection& s) {
    found = s;
    return false;
  });
  return found;
}

inline std::size_t countGlobalSections(const SpectralPresheaf& sigma) {
  std::size_t count = 0;
  detail::search_sections(sigma, [&](const GlobalSection&) {
    ++count;
    return true;
  });
  return count;
}

inline bool is_global_section(const SpectralPresheaf& sigma, const GlobalSection& s) {
  const auto& poset = sigma.poset();
  if (s.size() != poset.size()) return false;
  for (auto [lower, upper] : poset.arrows()) {
    if (poset.atom_map(lower, upper)[s[upper]] != s[lower]) return false;
  }
  return true;
}

}  // namespace toposq
