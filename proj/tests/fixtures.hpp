#pragma once

// Shared test scaffolding: Pauli matrices and the three reference posets
// (qubit z/x antichain, qutrit chain, Peres-Mermin square), built directly
// from matrices so tests do not depend on the scenario loader.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toposq/contexts.hpp"
#include "toposq/operators.hpp"
#include "toposq/spectrum.hpp"

namespace toposq::test {

inline Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Matrix pauli_x() { return mat2(0, 1, 1, 0); }
inline Matrix pauli_y() { return mat2(0, Complex(0, -1), Complex(0, 1), 0); }
inline Matrix pauli_z() { return mat2(1, 0, 0, -1); }
inline Matrix id2() { return Matrix::Identity(2, 2); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix diag(std::vector<double> d) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  return m;
}

inline Projection proj(const Matrix& m) { return Projection::from(m); }

inline Projection p0() { return proj(diag({1, 0})); }
inline Projection p1() { return proj(diag({0, 1})); }
inline Projection p_plus() { return proj(mat2(0.5, 0.5, 0.5, 0.5)); }
inline Projection p_minus() { return proj(mat2(0.5, -0.5, -0.5, 0.5)); }

inline Vector ket(std::vector<Complex> amps) {
  Vector v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) v(static_cast<Eigen::Index>(i)) = amps[i];
  return v;
}

inline PureState zero() { return PureState::from(ket({1, 0})); }
inline PureState one() { return PureState::from(ket({0, 1})); }
inline PureState plus() { return PureState::from(ket({M_SQRT1_2, M_SQRT1_2})); }
inline PureState basis(std::size_t dim, std::size_t i) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return PureState::from(v);
}

inline Context context_z() { return Context::from_atoms("V_z", {p0(), p1()}); }
inline Context context_x() { return Context::from_atoms("V_x", {p_plus(), p_minus()}); }
inline Context context_y() {
  return Context::from_atoms(
      "V_y", {proj(mat2(0.5, Complex(0, -0.5), Complex(0, 0.5), 0.5)),
              proj(mat2(0.5, Complex(0, 0.5), Complex(0, -0.5), 0.5))});
}

inline Projection e(std::size_t i) {
  std::vector<double> d(3, 0.0);
  d[i] = 1.0;
  return proj(diag(d));
}

inline Context context_v3() { return Context::from_atoms("V3", {e(0), e(1), e(2)}); }

/// Poset A: V_z, V_x with subalgebra closure (an antichain).
inline PresheafPtr poset_a() { return make_presheaf(buildPoset({context_z(), context_x()}, Closure::subalgebras)); }

/// Poset B: V3 = diag atoms and its three 2-atom coarsenings.
inline PresheafPtr poset_b() { return make_presheaf(buildPoset({context_v3()}, Closure::subalgebras)); }

/// Rows then columns of the Peres-Mermin square.
inline std::vector<std::vector<Matrix>> mermin_rows_and_columns() {
  const Matrix x = pauli_x(), y = pauli_y(), z = pauli_z(), i = id2();
  const Matrix x1 = kron(x, i), ix = kron(i, x), xx = kron(x, x);
  const Matrix iy = kron(i, y), y1 = kron(y, i), yy = kron(y, y);
  const Matrix xy = kron(x, y), yx = kron(y, x), zz = kron(z, z);
  return {{x1, ix, xx}, {iy, y1, yy}, {xy, yx, zz}, {x1, iy, xy}, {ix, y1, yx}, {xx, yy, zz}};
}

inline std::vector<Context> mermin_contexts() {
  const char* names[] = {"R1", "R2", "R3", "C1", "C2", "C3"};
  std::vector<Context> out;
  const auto families = mermin_rows_and_columns();
  for (std::size_t k = 0; k < families.size(); ++k) {
    std::vector<Projection> gens;
    for (const auto& obs : families[k]) {
      for (const auto& c : spectralDecompose(Observable::from(obs))) gens.push_back(c.projection);
    }
    out.push_back(generateContext(gens, names[k]));
  }
  return out;
}

inline PresheafPtr poset_mermin() { return make_presheaf(buildPoset(mermin_contexts(), Closure::subalgebras)); }

/// Qubit contexts V_z, V_x, V_y: informationally complete.
inline PresheafPtr poset_xyz() {
  return make_presheaf(buildPoset({context_z(), context_x(), context_y()}, Closure::subalgebras));
}

/// The computational basis and the three quadratic-phase bases of a qutrit:
/// four mutually unbiased bases, informationally complete.
inline PresheafPtr poset_qutrit_mub() {
  std::vector<Context> contexts{context_v3()};
  const Complex omega = std::polar(1.0, 2.0 * M_PI / 3.0);
  for (int a = 0; a < 3; ++a) {
    std::vector<Projection> atoms;
    for (int b = 0; b < 3; ++b) {
      Vector v(3);
      for (int k = 0; k < 3; ++k) v(k) = std::pow(omega, a * k * k + b * k) / std::sqrt(3.0);
      atoms.push_back(PureState::normalised(v).projector());
    }
    contexts.push_back(Context::from_atoms("M" + std::to_string(a), atoms));
  }
  return make_presheaf(buildPoset(contexts, Closure::subalgebras));
}

}  // namespace toposq::test
