#pragma once

// Seeded generators for test inputs: Haar-like unitaries via QR of complex
// Ginibre matrices, projections of given rank, pure and mixed states, and a
// Fibonacci lattice on the Bloch sphere.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "toposq/operators.hpp"

namespace toposq {

template <class Rng>
Matrix randomGinibre(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

template <class Rng>
Matrix randomUnitary(std::size_t dim, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(randomGinibre(dim, rng));
  return qr.householderQ();
}

/// Projection onto a random rank-k subspace.
template <class Rng>
Projection randomProjection(std::size_t dim, std::size_t rank, Rng& rng) {
  const Matrix u = randomUnitary(dim, rng);
  const Matrix basis = u.leftCols(static_cast<Eigen::Index>(rank));
  return Projection::unchecked(hermitian_part(basis * basis.adjoint()));
}

/// Rank drawn uniformly from 1..dim-1.
template <class Rng>
Projection randomProjection(std::size_t dim, Rng& rng) {
  std::uniform_int_distribution<std::size_t> rank(1, dim - 1);
  return randomProjection(dim, rank(rng), rng);
}

template <class Rng>
PureState randomPureState(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return PureState::normalised(v);
}

/// Hilbert-Schmidt distributed density matrix: G G^dagger / tr.
template <class Rng>
DensityState randomDensity(std::size_t dim, Rng& rng) {
  const Matrix g = randomGinibre(dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityState::from(hermitian_part(rho));
}

/// Qubit states on an n-point Fibonacci lattice over the Bloch sphere.
inline std::vector<PureState> blochGrid(std::size_t points) {
  std::vector<PureState> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < points; ++k) {
    const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    const double theta = std::acos(z);
    const double phi = golden * static_cast<double>(k);
    Vector v(2);
    v << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
    out.push_back(PureState::normalised(v));
  }
  return out;
}

}  // namespace toposq
