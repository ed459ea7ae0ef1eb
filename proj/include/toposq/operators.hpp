#pragma once

// Finite-dimensional operator kernel: typed wrappers over dense complex
// matrices, Hermitian spectral decomposition with eigenvalue clustering,
// joint atoms of commuting projection families, and Born probabilities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "toposq/error.hpp"

namespace toposq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Global numeric thresholds. `num` governs every operator comparison,
/// `cluster` merges nearby eigenvalues, `meas` governs measure identities.
struct Tolerances {
  double num = 1e-9;
  double cluster = 1e-7;
  double meas = 1e-9;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

inline constexpr std::size_t kMinDim = 2;
inline constexpr std::size_t kMaxDim = 64;

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

inline void check_square_dim(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const auto dim = static_cast<std::size_t>(m.rows());
  if (dim < kMinDim || dim > kMaxDim) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension " + std::to_string(dim) + " outside [2, 64]");
  }
}

inline bool is_hermitian(const Matrix& m, double tol) { return max_abs(m - m.adjoint()) <= tol; }

class Observable {
 public:
  static Observable from(Matrix m, const Tolerances& tol = {}) {
    check_square_dim(m);
    if (!is_hermitian(m, tol.num)) throw Error(ErrorCode::NotHermitian, "observable is not Hermitian");
    return Observable(hermitian_part(m));
  }

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

 private:
  explicit Observable(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

class Projection {
 public:
  /// Validates Hermiticity and idempotence.
  static Projection from(Matrix m, const Tolerances& tol = {}) {
    check_square_dim(m);
    if (!is_hermitian(m, tol.num)) throw Error(ErrorCode::NotHermitian, "projection is not Hermitian");
    if (max_abs(m * m - m) > tol.num) throw Error(ErrorCode::NotProjection, "matrix is not idempotent");
    return Projection(hermitian_part(m));
  }

  /// For matrices that are projections by construction (atom sums, eigenprojections).
  static Projection unchecked(Matrix m) { return Projection(std::move(m)); }

  static Projection zero(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Projection(Matrix::Zero(n, n));
  }
  static Projection identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Projection(Matrix::Identity(n, n));
  }

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(std::lround(m_.trace().real())); }
  Projection complement() const { return Projection(Matrix::Identity(m_.rows(), m_.cols()) - m_); }

 private:
  explicit Projection(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

inline bool approx_equal(const Projection& p, const Projection& q, const Tolerances& tol = {}) {
  return p.dim() == q.dim() && max_abs(p.matrix() - q.matrix()) <= tol.num;
}

inline bool is_zero(const Projection& p, const Tolerances& tol = {}) { return max_abs(p.matrix()) <= tol.num; }

class PureState {
 public:
  static PureState from(Vector v, const Tolerances& tol = {}) {
    const auto n = static_cast<std::size_t>(v.size());
    if (n < kMinDim || n > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "state dimension outside [2, 64]");
    if (std::abs(v.norm() - 1.0) > tol.num) throw Error(ErrorCode::NotUnitVector, "state vector is not normalised");
    return PureState(std::move(v));
  }

  /// Normalises a nonzero vector.
  static PureState normalised(const Vector& v) {
    const double n = v.norm();
    if (n == 0.0) throw Error(ErrorCode::NotUnitVector, "zero vector");
    return from(v / n);
  }

  const Vector& amplitudes() const noexcept { return v_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(v_.size()); }
  Projection projector() const { return Projection::unchecked(v_ * v_.adjoint()); }

 private:
  explicit PureState(Vector v) : v_(std::move(v)) {}
  Vector v_;
};

class DensityState {
 public:
  static DensityState from(Matrix m, const Tolerances& tol = {}) {
    check_square_dim(m);
    if (!is_hermitian(m, tol.num)) throw Error(ErrorCode::NotHermitian, "density matrix is not Hermitian");
    Matrix h = hermitian_part(m);
    if (std::abs(h.trace().real() - 1.0) > tol.num) throw Error(ErrorCode::NotDensity, "trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.num) {
      throw Error(ErrorCode::NotDensity, "density matrix is not positive semidefinite");
    }
    return DensityState(std::move(h));
  }

  static DensityState pure(const PureState& psi) { return DensityState(psi.projector().matrix()); }

  static DensityState maximally_mixed(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return DensityState(Matrix::Identity(n, n) / static_cast<double>(dim));
  }

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

  /// tr(rho P), real part.
  double expectation(const Projection& p) const { return (m_ * p.matrix()).trace().real(); }

 private:
  explicit DensityState(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// ---------------------------------------------------------------------------
// Spectral decomposition

struct SpectralComponent {
  double eigenvalue;
  Projection projection;
};

/// Eigenvalues strictly increasing; eigenvalues whose consecutive gap is below
/// `tol.cluster` share one eigenprojection (reported at the cluster mean).
inline std::vector<SpectralComponent> spectralDecompose(const Observable& a, const Tolerances& tol = {}) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  const auto& values = es.eigenvalues();
  const auto& vectors = es.eigenvectors();
  const Eigen::Index n = values.size();

  std::vector<SpectralComponent> out;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && values(end) - values(end - 1) < tol.cluster) ++end;
    const Matrix basis = vectors.middleCols(start, end - start);
    const double mean = values.segment(start, end - start).mean();
    out.push_back({mean, Projection::unchecked(hermitian_part(basis * basis.adjoint()))});
    start = end;
  }
  return out;
}

struct Interval {
  double lo;
  double hi;
};

/// Finite union of closed intervals; a point is a degenerate interval.
using IntervalSet = std::vector<Interval>;

inline bool contains(const IntervalSet& delta, double x, double eps) {
  return std::any_of(delta.begin(), delta.end(),
                     [&](const Interval& iv) { return x >= iv.lo - eps && x <= iv.hi + eps; });
}

/// E[A in delta]: the sum of the eigenprojections whose eigenvalue lies in delta.
inline Projection spectralProjection(const Observable& a, const IntervalSet& delta, const Tolerances& tol = {}) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& c : spectralDecompose(a, tol)) {
    if (contains(delta, c.eigenvalue, tol.num)) sum += c.projection.matrix();
  }
  return Projection::unchecked(std::move(sum));
}

// ---------------------------------------------------------------------------
// Order and lattice helpers

inline void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a) + " vs " + std::to_string(b));
  }
}

/// Range inclusion: P <= Q iff QP = P.
inline bool projectionLeq(const Projection& p, const Projection& q, const Tolerances& tol = {}) {
  check_same_dim(p.dim(), q.dim());
  return max_abs(q.matrix() * p.matrix() - p.matrix()) <= tol.num;
}

inline bool projectionLess(const Projection& p, const Projection& q, const Tolerances& tol = {}) {
  return projectionLeq(p, q, tol) && !approx_equal(p, q, tol);
}

/// Range projection of P + Q, i.e. the lattice join in P(H); correct for
/// non-commuting inputs.
inline Projection projectionJoin(const Projection& p, const Projection& q, const Tolerances& tol = {}) {
  check_same_dim(p.dim(), q.dim());
  const auto sum = Observable::from(p.matrix() + q.matrix(), tol);
  return spectralProjection(sum, {{tol.cluster, 2.0 + tol.cluster}}, tol);
}

/// De Morgan dual of projectionJoin.
inline Projection projectionMeet(const Projection& p, const Projection& q, const Tolerances& tol = {}) {
  return projectionJoin(p.complement(), q.complement(), tol).complement();
}

inline bool commute(const Projection& p, const Projection& q, double eps) {
  return max_abs(p.matrix() * q.matrix() - q.matrix() * p.matrix()) <= eps;
}

/// Minimal nonzero projections of the abelian algebra generated by a commuting
/// family. Starts from {1} and splits every atom a into {aP, a(1-P)}.
inline std::vector<Projection> jointAtoms(std::span<const Projection> family, const Tolerances& tol = {}) {
  if (family.empty()) throw Error(ErrorCode::InvalidContext, "empty generator family");
  const std::size_t dim = family.front().dim();
  for (std::size_t i = 0; i < family.size(); ++i) {
    check_same_dim(dim, family[i].dim());
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      if (!commute(family[i], family[j], tol.num)) throw NonCommutingError(i, j);
    }
  }

  std::vector<Matrix> atoms{Projection::identity(dim).matrix()};
  for (const auto& generator : family) {
    std::vector<Matrix> next;
    for (const auto& a : atoms) {
      Matrix inside = hermitian_part(a * generator.matrix());
      Matrix outside = a - inside;
      if (max_abs(inside) > tol.num) next.push_back(std::move(inside));
      if (max_abs(outside) > tol.num) next.push_back(std::move(outside));
    }
    atoms = std::move(next);
  }

  std::vector<Projection> out;
  out.reserve(atoms.size());
  for (auto& a : atoms) out.push_back(Projection::unchecked(std::move(a)));
  return out;
}

// ---------------------------------------------------------------------------
// Born rule

inline double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

/// <psi|P|psi>, clamped to [0, 1].
inline double bornProbability(const PureState& psi, const Projection& p) {
  check_same_dim(psi.dim(), p.dim());
  const Complex value = psi.amplitudes().dot(p.matrix() * psi.amplitudes());
  return clamp_unit(value.real());
}

}  // namespace toposq
