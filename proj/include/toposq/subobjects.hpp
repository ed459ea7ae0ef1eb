#pragma once

// Clopen subobjects of the spectral presheaf and their Heyting algebra.
// On finite spectra every subset is clopen, so a clopen subobject is a
// family of character sets, one per context, closed under restriction.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "toposq/error.hpp"
#include "toposq/spectrum.hpp"

namespace toposq {

/// alpha: projections of V -> subsets of its spectrum.
inline Mask alpha(const Context& v, const Projection& p, const Tolerances& tol = {}) {
  Mask m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (evaluateCharacter(v, i, p, tol) == 1) m |= Mask{1} << i;
  }
  return m;
}

inline Projection alphaInverse(const Context& v, Mask s) { return v.block(s); }

class ClopenSubobject {
 public:
  /// Checks restriction closure.
  static ClopenSubobject from_components(PresheafPtr sigma, std::vector<Mask> components) {
    if (components.size() != sigma->size()) {
      throw Error(ErrorCode::NotSubobject, "expected one component per context");
    }
    for (std::size_t v = 0; v < components.size(); ++v) {
      if ((components[v] & ~full_mask(sigma->spectrum_size(v))) != 0) {
        throw Error(ErrorCode::NotSubobject, "component at '" + sigma->context(v).id() + "' exceeds its spectrum");
      }
    }
    ClopenSubobject s(std::move(sigma), std::move(components));
    if (auto bad = s.closure_violation()) {
      throw Error(ErrorCode::NotSubobject, "not restriction-closed from '" + s.sigma_->context(bad->second).id() +
                                               "' to '" + s.sigma_->context(bad->first).id() + "'");
    }
    return s;
  }

  static ClopenSubobject empty(PresheafPtr sigma) {
    const std::size_t n = sigma->size();
    return ClopenSubobject(std::move(sigma), std::vector<Mask>(n, 0));
  }

  static ClopenSubobject full(PresheafPtr sigma) {
    std::vector<Mask> comps(sigma->size());
    for (std::size_t v = 0; v < comps.size(); ++v) comps[v] = full_mask(sigma->spectrum_size(v));
    return ClopenSubobject(std::move(sigma), std::move(comps));
  }

  const PresheafPtr& presheaf() const noexcept { return sigma_; }
  const std::vector<Mask>& components() const noexcept { return comps_; }
  Mask component(std::size_t v) const { return comps_.at(v); }

  /// First (lower, upper) arrow along which restriction leaves the family, if any.
  std::optional<std::pair<std::size_t, std::size_t>> closure_violation() const {
    for (auto [lower, upper] : sigma_->poset().arrows()) {
      const Mask image = sigma_->restrict_mask(comps_[upper], upper, lower);
      if ((image & ~comps_[lower]) != 0) return std::make_pair(lower, upper);
    }
    return std::nullopt;
  }

  bool is_restriction_closed() const { return !closure_violation().has_value(); }

  friend bool operator==(const ClopenSubobject& a, const ClopenSubobject& b) {
    return a.sigma_ == b.sigma_ && a.comps_ == b.comps_;
  }

 private:
  ClopenSubobject(PresheafPtr sigma, std::vector<Mask> comps) : sigma_(std::move(sigma)), comps_(std::move(comps)) {}

  friend ClopenSubobject meet(const ClopenSubobject&, const ClopenSubobject&);
  friend ClopenSubobject join(const ClopenSubobject&, const ClopenSubobject&);
  friend ClopenSubobject implies(const ClopenSubobject&, const ClopenSubobject&);
  template <class Rng>
  friend ClopenSubobject randomSubobject(const PresheafPtr&, Rng&);
  friend std::vector<ClopenSubobject> enumerateSubobjects(const PresheafPtr&, std::size_t);

  PresheafPtr sigma_;
  std::vector<Mask> comps_;
};

namespace detail {
inline void check_same_presheaf(const ClopenSubobject& a, const ClopenSubobject& b) {
  if (a.presheaf() != b.presheaf()) throw Error(ErrorCode::PresheafMismatch, "subobjects live on different presheaves");
}
}  // namespace detail

inline ClopenSubobject meet(const ClopenSubobject& a, const ClopenSubobject& b) {
  detail::check_same_presheaf(a, b);
  std::vector<Mask> c(a.comps_.size());
  for (std::size_t v = 0; v < c.size(); ++v) c[v] = a.comps_[v] & b.comps_[v];
  return ClopenSubobject(a.sigma_, std::move(c));
}

inline ClopenSubobject join(const ClopenSubobject& a, const ClopenSubobject& b) {
  detail::check_same_presheaf(a, b);
  std::vector<Mask> c(a.comps_.size());
  for (std::size_t v = 0; v < c.size(); ++v) c[v] = a.comps_[v] | b.comps_[v];
  return ClopenSubobject(a.sigma_, std::move(c));
}

inline bool leq(const ClopenSubobject& a, const ClopenSubobject& b) {
  detail::check_same_presheaf(a, b);
  for (std::size_t v = 0; v < a.components().size(); ++v) {
    if ((a.component(v) & ~b.component(v)) != 0) return false;
  }
  return true;
}

/// (S1 => S2)_V: characters of V whose restriction to every V' <= V lies in
/// S2 whenever it lies in S1. Not local at V.
inline ClopenSubobject implies(const ClopenSubobject& a, const ClopenSubobject& b) {
  detail::check_same_presheaf(a, b);
  const auto& sigma = *a.sigma_;
  const auto& poset = sigma.poset();
  std::vector<Mask> c(a.comps_.size(), 0);
  for (std::size_t v = 0; v < c.size(); ++v) {
    const auto below = poset.down_set(v);
    for (std::size_t lambda = 0; lambda < sigma.spectrum_size(v); ++lambda) {
      const bool ok = std::all_of(below.begin(), below.end(), [&](std::size_t w) {
        const std::size_t r = poset.atom_map(w, v)[lambda];
        return !has_bit(a.comps_[w], r) || has_bit(b.comps_[w], r);
      });
      if (ok) c[v] |= Mask{1} << lambda;
    }
  }
  return ClopenSubobject(a.sigma_, std::move(c));
}

inline ClopenSubobject negate(const ClopenSubobject& s) { return implies(s, ClopenSubobject::empty(s.presheaf())); }

/// Draws per-context subsets (top-down, per-character probability itself
/// drawn per call) and closes them downward under restriction images.
template <class Rng>
ClopenSubobject randomSubobject(const PresheafPtr& sigma, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = unit(rng);
  std::vector<Mask> comps(sigma->size(), 0);
  for (std::size_t v = 0; v < comps.size(); ++v) {
    for (std::size_t i = 0; i < sigma->spectrum_size(v); ++i) {
      if (unit(rng) < p) comps[v] |= Mask{1} << i;
    }
  }
  // Canonical order lists larger contexts first, so one pass closes downward.
  for (std::size_t v = 0; v < comps.size(); ++v) {
    for (std::size_t w : sigma->poset().down_set(v)) {
      if (w != v) comps[w] |= sigma->restrict_mask(comps[v], v, w);
    }
  }
  return ClopenSubobject(sigma, std::move(comps));
}

inline constexpr std::size_t kEnumerationCharacterLimit = 12;

/// Every clopen subobject, by backtracking from the smallest contexts up.
/// Guarded by the total character count (exponential).
inline std::vector<ClopenSubobject> enumerateSubobjects(const PresheafPtr& sigma,
                                                       std::size_t character_limit = kEnumerationCharacterLimit) {
  const auto& poset = sigma->poset();
  if (poset.character_count() > character_limit) {
    throw Error(ErrorCode::Capacity, "presheaf has " + std::to_string(poset.character_count()) +
                                         " characters; full enumeration is limited to " +
                                         std::to_string(character_limit));
  }
  const std::size_t n = sigma->size();
  std::vector<Mask> comps(n, 0);
  std::vector<ClopenSubobject> out;
  // Indices in reverse canonical order: every proper subcontext comes first.
  auto recurse = [&](auto&& self, std::size_t k) -> void {
    if (k == n) {
      out.push_back(ClopenSubobject(sigma, comps));
      return;
    }
    const std::size_t v = n - 1 - k;
    const auto below = poset.down_set(v);
    for (Mask m = 0; m <= full_mask(sigma->spectrum_size(v)); ++m) {
      const bool closed = std::all_of(below.begin(), below.end(), [&](std::size_t w) {
        return w == v || (sigma->restrict_mask(m, v, w) & ~comps[w]) == 0;
      });
      if (!closed) continue;
      comps[v] = m;
      self(self, k + 1);
    }
    comps[v] = 0;
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace toposq
