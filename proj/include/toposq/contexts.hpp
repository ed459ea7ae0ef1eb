#pragma once

// Contexts (finite abelian algebras given by their atoms), their nontrivial
// subalgebras, the finite context poset ordered by inclusion, and sieves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "toposq/error.hpp"
#include "toposq/operators.hpp"

namespace toposq {

namespace detail {

// Sort key for the canonical atom order: rank first, then entries rounded at
// 1e-6, compared lexicographically as (re, im) pairs in row-major order.
inline std::vector<long long> rounded_entries(const Matrix& m) {
  std::vector<long long> key;
  key.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      key.push_back(std::llround(m(r, c).real() * 1e6));
      key.push_back(std::llround(m(r, c).imag() * 1e6));
    }
  }
  return key;
}

inline bool canonical_atom_before(const Projection& a, const Projection& b) {
  if (a.rank() != b.rank()) return a.rank() > b.rank();
  return rounded_entries(a.matrix()) > rounded_entries(b.matrix());
}

}  // namespace detail

class Context {
 public:
  /// Validates the atom family (nonzero, pairwise orthogonal, summing to 1,
  /// at least two atoms) and puts it in canonical order.
  static Context from_atoms(std::string id, std::vector<Projection> atoms, const Tolerances& tol = {}) {
    if (atoms.empty()) throw Error(ErrorCode::InvalidContext, "context '" + id + "' has no atoms");
    const std::size_t dim = atoms.front().dim();
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix sum = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      check_same_dim(dim, atoms[i].dim());
      if (is_zero(atoms[i], tol)) throw Error(ErrorCode::InvalidContext, "context '" + id + "' has a zero atom");
      for (std::size_t j = i + 1; j < atoms.size(); ++j) {
        if (max_abs(atoms[i].matrix() * atoms[j].matrix()) > tol.num) {
          throw Error(ErrorCode::InvalidContext, "atoms of context '" + id + "' are not orthogonal");
        }
      }
      sum += atoms[i].matrix();
    }
    if (max_abs(sum - Matrix::Identity(n, n)) > 10 * tol.num) {
      throw Error(ErrorCode::InvalidContext, "atoms of context '" + id + "' do not sum to the identity");
    }
    if (atoms.size() < 2) {
      throw Error(ErrorCode::TrivialContext, "context '" + id + "' is the trivial algebra C*1");
    }
    std::stable_sort(atoms.begin(), atoms.end(), detail::canonical_atom_before);
    return Context(std::move(id), std::move(atoms));
  }

  const std::string& id() const noexcept { return id_; }
  const std::vector<Projection>& atoms() const noexcept { return atoms_; }
  const Projection& atom(std::size_t i) const { return atoms_.at(i); }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t dim() const noexcept { return atoms_.front().dim(); }

  /// Sum of the atoms whose bit is set in `mask`.
  Projection block(std::uint64_t mask) const {
    const auto n = static_cast<Eigen::Index>(dim());
    Matrix sum = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if ((mask >> i) & 1U) sum += atoms_[i].matrix();
    }
    return Projection::unchecked(std::move(sum));
  }

 private:
  Context(std::string id, std::vector<Projection> atoms) : id_(std::move(id)), atoms_(std::move(atoms)) {}

  std::string id_;
  std::vector<Projection> atoms_;
};

/// Atom sets equal up to tol.num, by greedy matching.
inline bool same_algebra(const Context& a, const Context& b, const Tolerances& tol = {}) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& x : a.atoms()) {
    bool matched = false;
    for (std::size_t j = 0; j < b.size() && !matched; ++j) {
      if (!used[j] && approx_equal(x, b.atom(j), tol)) used[j] = matched = true;
    }
    if (!matched) return false;
  }
  return true;
}

inline Context generateContext(std::span<const Projection> generators, std::string id, const Tolerances& tol = {}) {
  return Context::from_atoms(std::move(id), jointAtoms(generators, tol), tol);
}

namespace detail {

// Restricted growth strings of length n in lexicographic order; each one is a
// set partition with block labels 0..k-1.
inline std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> rgs(n, 0);
  auto recurse = [&](auto&& self, std::size_t pos, std::size_t max_label) -> void {
    if (pos == n) {
      out.push_back(rgs);
      return;
    }
    for (std::size_t label = 0; label <= max_label + 1; ++label) {
      rgs[pos] = label;
      self(self, pos + 1, std::max(max_label, label));
    }
  };
  if (n == 0) return out;
  rgs[0] = 0;
  recurse(recurse, 1, 0);
  return out;
}

inline std::string partition_label(const std::vector<std::size_t>& rgs) {
  const std::size_t blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
  std::string label = "[";
  for (std::size_t b = 0; b < blocks; ++b) {
    if (b > 0) label += '|';
    bool first = true;
    for (std::size_t i = 0; i < rgs.size(); ++i) {
      if (rgs[i] != b) continue;
      if (!first) label += '+';
      label += std::to_string(i);
      first = false;
    }
  }
  return label + "]";
}

}  // namespace detail

/// One context per partition of V's atoms into at least two blocks. The
/// discrete partition is V itself and keeps its id; coarsenings are named
/// `<id>[0+1|2]` after the parent atom indices they merge.
inline std::vector<Context> enumerateSubalgebras(const Context& v, const Tolerances& tol = {}) {
  std::vector<Context> out;
  for (const auto& rgs : detail::set_partitions(v.size())) {
    const std::size_t blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    if (blocks < 2) continue;
    if (blocks == v.size()) {
      out.push_back(v);
      continue;
    }
    std::vector<std::uint64_t> masks(blocks, 0);
    for (std::size_t i = 0; i < rgs.size(); ++i) masks[rgs[i]] |= std::uint64_t{1} << i;
    std::vector<Projection> atoms;
    atoms.reserve(blocks);
    for (auto m : masks) atoms.push_back(v.block(m));
    out.push_back(Context::from_atoms(v.id() + detail::partition_label(rgs), std::move(atoms), tol));
  }
  return out;
}

enum class Closure { none, subalgebras };

/// Finite poset of contexts under algebra inclusion. Contexts are stored in
/// canonical order (descending atom count, then id) and addressed by index.
class ContextPoset {
 public:
  std::size_t size() const noexcept { return contexts_.size(); }
  std::size_t dim() const noexcept { return contexts_.front().dim(); }
  const Context& context(std::size_t i) const { return contexts_.at(i); }
  const std::vector<Context>& contexts() const noexcept { return contexts_; }
  const Tolerances& tolerances() const noexcept { return tol_; }

  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < contexts_.size(); ++i) {
      if (contexts_[i].id() == id) return i;
    }
    throw Error(ErrorCode::UnknownContext, "no context '" + id + "'");
  }

  /// lower <= upper, i.e. lower is a subalgebra of upper.
  bool leq(std::size_t lower, std::size_t upper) const { return leq_.at(upper).at(lower); }

  /// For lower <= upper: the atom of `lower` dominating each atom of `upper`.
  const std::vector<std::size_t>& atom_map(std::size_t lower, std::size_t upper) const {
    if (!leq(lower, upper)) {
      throw Error(ErrorCode::NotBelow,
                  "'" + contexts_[lower].id() + "' is not below '" + contexts_[upper].id() + "'");
    }
    return maps_[upper][lower];
  }

  /// Indices of all contexts below v (including v), ascending.
  std::vector<std::size_t> down_set(std::size_t v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (leq(i, v)) out.push_back(i);
    }
    return out;
  }

  /// Strict inclusions V' < V, as (lower, upper) index pairs.
  std::vector<std::pair<std::size_t, std::size_t>> arrows() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t upper = 0; upper < size(); ++upper) {
      for (std::size_t lower = 0; lower < size(); ++lower) {
        if (lower != upper && leq(lower, upper)) out.emplace_back(lower, upper);
      }
    }
    return out;
  }

  std::size_t character_count() const {
    std::size_t n = 0;
    for (const auto& c : contexts_) n += c.size();
    return n;
  }

  friend ContextPoset buildPoset(std::vector<Context>, Closure, const Tolerances&);

 private:
  std::vector<Context> contexts_;
  std::vector<std::vector<bool>> leq_;                          // leq_[upper][lower]
  std::vector<std::vector<std::vector<std::size_t>>> maps_;  // maps_[upper][lower][atom of upper]
  Tolerances tol_;
};

namespace detail {

// Atom map upper -> lower when every atom of `upper` lies below exactly one
// atom of `lower`; nullopt otherwise.
inline std::optional<std::vector<std::size_t>> refinement(const Context& lower, const Context& upper,
                                                          const Tolerances& tol) {
  std::vector<std::size_t> map(upper.size());
  for (std::size_t i = 0; i < upper.size(); ++i) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (projectionLeq(upper.atom(i), lower.atom(j), tol)) {
        map[i] = j;
        ++hits;
      }
    }
    if (hits != 1) return std::nullopt;
  }
  return map;
}

}  // namespace detail

/// Assembles the poset. With `Closure::subalgebras` all nontrivial subalgebras
/// of the generating contexts are added; contexts with equal atom sets are
/// identified (generating contexts keep their ids, otherwise first one wins).
inline ContextPoset buildPoset(std::vector<Context> generating, Closure closure, const Tolerances& tol = {}) {
  if (generating.empty()) throw Error(ErrorCode::InvalidContext, "no generating contexts");
  const std::size_t dim = generating.front().dim();
  for (std::size_t i = 0; i < generating.size(); ++i) {
    check_same_dim(dim, generating[i].dim());
    for (std::size_t j = 0; j < i; ++j) {
      if (generating[i].id() == generating[j].id()) {
        throw Error(ErrorCode::DuplicateId, "context id '" + generating[i].id() + "' is used twice");
      }
    }
  }

  std::vector<Context> all;
  auto add = [&](const Context& c) {
    const bool known = std::any_of(all.begin(), all.end(), [&](const Context& x) { return same_algebra(x, c, tol); });
    if (!known) all.push_back(c);
  };
  for (const auto& g : generating) add(g);
  if (closure == Closure::subalgebras) {
    for (const auto& g : generating) {
      for (const auto& sub : enumerateSubalgebras(g, tol)) add(sub);
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (all[i].id() == all[j].id()) {
        throw Error(ErrorCode::DuplicateId, "context id '" + all[i].id() + "' is used twice");
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Context& a, const Context& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.id() < b.id();
  });

  ContextPoset poset;
  const std::size_t n = all.size();
  poset.leq_.assign(n, std::vector<bool>(n, false));
  poset.maps_.assign(n, std::vector<std::vector<std::size_t>>(n));
  for (std::size_t upper = 0; upper < n; ++upper) {
    for (std::size_t lower = 0; lower < n; ++lower) {
      if (all[lower].size() > all[upper].size()) continue;
      if (auto map = detail::refinement(all[lower], all[upper], tol)) {
        poset.leq_[upper][lower] = true;
        poset.maps_[upper][lower] = std::move(*map);
      }
    }
  }
  poset.contexts_ = std::move(all);
  poset.tol_ = tol;
  return poset;
}

// ---------------------------------------------------------------------------
// Sieves

/// A downward-closed set of contexts below `base`, as a membership vector
/// over poset indices.
struct Sieve {
  std::size_t base = 0;
  std::vector<bool> members;

  bool contains(std::size_t v) const { return members.at(v); }
  bool empty() const { return std::none_of(members.begin(), members.end(), [](bool b) { return b; }); }
  friend bool operator==(const Sieve&, const Sieve&) = default;
};

inline Sieve emptySieve(const ContextPoset& poset, std::size_t v) {
  return Sieve{v, std::vector<bool>(poset.size(), false)};
}

/// The maximal sieve at v: its whole down-set.
inline Sieve principalSieve(const ContextPoset& poset, std::size_t v) {
  if (v >= poset.size()) throw Error(ErrorCode::UnknownContext, "context index out of range");
  Sieve s = emptySieve(poset, v);
  for (std::size_t i = 0; i < poset.size(); ++i) s.members[i] = poset.leq(i, v);
  return s;
}

inline Sieve principalSieve(const ContextPoset& poset, const std::string& id) {
  return principalSieve(poset, poset.index_of(id));
}

inline bool is_maximal(const ContextPoset& poset, const Sieve& s) { return s == principalSieve(poset, s.base); }

inline bool is_sieve(const ContextPoset& poset, const Sieve& s) {
  for (std::size_t i = 0; i < poset.size(); ++i) {
    if (!s.members[i]) continue;
    if (!poset.leq(i, s.base)) return false;
    for (std::size_t j = 0; j < poset.size(); ++j) {
      if (poset.leq(j, i) && !s.members[j]) return false;
    }
  }
  return true;
}

inline Sieve sieveIntersectDown(const ContextPoset& poset, const Sieve& s, std::size_t lower) {
  if (!poset.leq(lower, s.base)) {
    throw Error(ErrorCode::NotBelow,
                "'" + poset.context(lower).id() + "' is not below '" + poset.context(s.base).id() + "'");
  }
  Sieve out = emptySieve(poset, lower);
  for (std::size_t i = 0; i < poset.size(); ++i) out.members[i] = s.members[i] && poset.leq(i, lower);
  return out;
}

inline bool sieve_leq(const Sieve& a, const Sieve& b) {
  for (std::size_t i = 0; i < a.members.size(); ++i) {
    if (a.members[i] && !b.members[i]) return false;
  }
  return a.base == b.base;
}

}  // namespace toposq
