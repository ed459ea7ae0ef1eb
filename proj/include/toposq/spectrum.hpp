#pragma once

// Gel'fand spectra of finite contexts. A character of a context is identified
// with one of its atoms: it sends a projection of the context to 1 exactly
// when that projection dominates the atom. Restriction along V' <= V sends a
// character to the atom of V' containing its atom.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "toposq/contexts.hpp"
#include "toposq/error.hpp"
#include "toposq/operators.hpp"

namespace toposq {

struct Character {
  std::size_t context = 0;  // poset index
  std::size_t atom = 0;     // index into the context's atoms

  friend bool operator==(const Character&, const Character&) = default;
};

/// Subsets of a finite spectrum, one bit per character.
using Mask = std::uint64_t;

inline Mask full_mask(std::size_t n) { return n >= 64 ? ~Mask{0} : (Mask{1} << n) - 1; }
inline bool has_bit(Mask m, std::size_t i) { return (m >> i) & 1U; }

/// 1 iff the character's atom lies below P. P must be a block sum of the
/// context's atoms: each atom is either below P or orthogonal to it.
inline int evaluateCharacter(const Context& v, std::size_t atom, const Projection& p, const Tolerances& tol = {}) {
  check_same_dim(v.dim(), p.dim());
  int value = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool below = projectionLeq(v.atom(i), p, tol);
    const bool orthogonal = max_abs(p.matrix() * v.atom(i).matrix()) <= tol.num;
    if (!below && !orthogonal) {
      throw Error(ErrorCode::NotInContext, "projection is not in context '" + v.id() + "'");
    }
    if (i == atom) value = below ? 1 : 0;
  }
  return value;
}

/// The Gel'fand transform of A at a character: the coefficient of the
/// character's atom when A = sum_i a_i atom_i.
inline double gelfandTransform(const Context& v, std::size_t atom, const Observable& a, const Tolerances& tol = {}) {
  check_same_dim(v.dim(), a.dim());
  const auto n = static_cast<Eigen::Index>(v.dim());
  Matrix rebuilt = Matrix::Zero(n, n);
  std::vector<double> coeffs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v.atom(i).matrix();
    coeffs[i] = (a.matrix() * e).trace().real() / e.trace().real();
    rebuilt += coeffs[i] * e;
  }
  if (max_abs(rebuilt - a.matrix()) > 10 * tol.num) {
    throw Error(ErrorCode::NotInContext, "observable is not in context '" + v.id() + "'");
  }
  return coeffs.at(atom);
}

/// The spectral presheaf over a finite context poset.
class SpectralPresheaf {
 public:
  explicit SpectralPresheaf(ContextPoset poset) : poset_(std::move(poset)) {}

  const ContextPoset& poset() const noexcept { return poset_; }
  std::size_t size() const noexcept { return poset_.size(); }
  const Context& context(std::size_t v) const { return poset_.context(v); }
  const Tolerances& tolerances() const noexcept { return poset_.tolerances(); }

  std::vector<Character> gelfandSpectrum(std::size_t v) const {
    std::vector<Character> out;
    for (std::size_t i = 0; i < poset_.context(v).size(); ++i) out.push_back({v, i});
    return out;
  }

  std::size_t spectrum_size(std::size_t v) const { return poset_.context(v).size(); }

  Character restrictCharacter(const Character& lambda, std::size_t lower) const {
    return {lower, poset_.atom_map(lower, lambda.context).at(lambda.atom)};
  }

  /// Image of a set of characters at `upper` under restriction to `lower`.
  Mask restrict_mask(Mask m, std::size_t upper, std::size_t lower) const {
    const auto& map = poset_.atom_map(lower, upper);
    Mask out = 0;
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (has_bit(m, i)) out |= Mask{1} << map[i];
    }
    return out;
  }

 private:
  ContextPoset poset_;
};

using PresheafPtr = std::shared_ptr<const SpectralPresheaf>;

inline PresheafPtr make_presheaf(ContextPoset poset) {
  return std::make_shared<const SpectralPresheaf>(std::move(poset));
}

}  // namespace toposq
