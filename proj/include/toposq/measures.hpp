#pragma once

// States as measures on the spectral presheaf: mu_rho(S) = (tr(rho P_{S_V}))_V,
// the measure axioms, generalised truth objects and the desk-scale inverse
// problem (recovering rho from atom probabilities).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "toposq/truth.hpp"

namespace toposq {

/// Context-indexed values in [0, 1], antitone along inclusions.
struct AntitoneValuation {
  std::vector<double> values;

  double at(std::size_t v) const { return values.at(v); }
};

/// Largest violation of values(V') >= values(V) over all V' <= V (0 if antitone).
inline double antitonicity_violation(const ContextPoset& poset, const AntitoneValuation& g) {
  double worst = 0.0;
  for (auto [lower, upper] : poset.arrows()) worst = std::max(worst, g.at(upper) - g.at(lower));
  return worst;
}

namespace detail {
// tr(rho a) for every atom of V.
inline std::vector<double> atom_probabilities(const DensityState& rho, const Context& v) {
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = rho.expectation(v.atom(i));
  return p;
}

inline double mask_probability(const std::vector<double>& atom_p, Mask s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < atom_p.size(); ++i) {
    if (has_bit(s, i)) sum += atom_p[i];
  }
  return sum;
}
}  // namespace detail

inline AntitoneValuation measure(const DensityState& rho, const ClopenSubobject& s) {
  const auto& sigma = *s.presheaf();
  check_same_dim(rho.dim(), sigma.poset().dim());
  AntitoneValuation g;
  g.values.resize(sigma.size());
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    g.values[v] = clamp_unit(rho.expectation(alphaInverse(sigma.context(v), s.component(v))));
  }
  return g;
}

struct AxiomWitness {
  ClopenSubobject first;
  ClopenSubobject second;
  std::size_t context;
};

struct MeasureAxiomReport {
  std::size_t pairs = 0;
  double normalisation_violation = 0.0;  // max |mu(Sigma)(V) - 1|
  double additivity_violation = 0.0;     // max |mu(S1 v S2) + mu(S1 ^ S2) - mu(S1) - mu(S2)|
  double antitonicity_violation = 0.0;
  std::optional<AxiomWitness> witness;   // worst additivity pair when it exceeds the tolerance

  double max_violation() const {
    return std::max({normalisation_violation, additivity_violation, antitonicity_violation});
  }
  bool passed(double eps) const { return max_violation() <= eps; }
};

/// Seeded random subobject pairs; both axioms checked stage-wise.
inline MeasureAxiomReport verifyMeasureAxioms(const DensityState& rho, const PresheafPtr& sigma, std::size_t pairs,
                                              std::uint64_t seed) {
  const auto& poset = sigma->poset();
  const double eps = sigma->tolerances().meas;
  MeasureAxiomReport report;
  report.pairs = pairs;

  const auto one = measure(rho, ClopenSubobject::full(sigma));
  for (double x : one.values) report.normalisation_violation = std::max(report.normalisation_violation, std::abs(x - 1.0));

  std::mt19937_64 rng(seed);
  double worst = -1.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto s1 = randomSubobject(sigma, rng);
    const auto s2 = randomSubobject(sigma, rng);
    const auto m1 = measure(rho, s1);
    const auto m2 = measure(rho, s2);
    const auto mj = measure(rho, join(s1, s2));
    const auto mm = measure(rho, meet(s1, s2));
    for (const auto* g : {&m1, &m2, &mj, &mm}) {
      report.antitonicity_violation = std::max(report.antitonicity_violation, antitonicity_violation(poset, *g));
    }
    for (std::size_t v = 0; v < poset.size(); ++v) {
      const double gap = std::abs(mj.at(v) + mm.at(v) - m1.at(v) - m2.at(v));
      if (gap > worst) {
        worst = gap;
        if (gap > eps) report.witness = AxiomWitness{s1, s2, v};
      }
      report.additivity_violation = std::max(report.additivity_violation, gap);
    }
  }
  return report;
}

inline constexpr std::size_t kMaxEnumeratedAtoms = 6;

/// { S subset of Sigma_V : tr(rho P_S) >= r }, ascending by mask. The slack is
/// strict so a zero-probability set stays out even for r below eps.
inline std::vector<Mask> generalizedTruthObjectComponent(const DensityState& rho, double r, const Context& v,
                                                         const Tolerances& tol = {}) {
  if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::BadThreshold, "threshold must lie in (0, 1]");
  check_same_dim(rho.dim(), v.dim());
  if (v.size() > kMaxEnumeratedAtoms) {
    throw Error(ErrorCode::Capacity, "context '" + v.id() + "' has more than 6 atoms");
  }
  const auto atom_p = detail::atom_probabilities(rho, v);
  std::vector<Mask> out;
  for (Mask s = 0; s <= full_mask(v.size()); ++s) {
    if (detail::mask_probability(atom_p, s) > r - tol.meas) out.push_back(s);
  }
  return out;
}

/// Default grid {0.05 k : k = 1..20}.
inline std::vector<double> default_r_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.05 * k);
  return grid;
}

class GeneralizedTruthObjectFamily {
 public:
  static GeneralizedTruthObjectFamily build(const DensityState& rho, const PresheafPtr& sigma,
                                            std::vector<double> grid = default_r_grid()) {
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) ||
        std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
      throw Error(ErrorCode::BadThreshold, "r-grid must be strictly increasing and nonempty");
    }
    GeneralizedTruthObjectFamily f(rho, sigma, grid);
    f.components_.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t v = 0; v < sigma->size(); ++v) {
        f.components_[k].push_back(
            generalizedTruthObjectComponent(rho, grid[k], sigma->context(v), sigma->tolerances()));
      }
    }
    return f;
  }

  const DensityState& state() const noexcept { return rho_; }
  const PresheafPtr& presheaf() const noexcept { return sigma_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<Mask>& component(std::size_t r_index, std::size_t v) const { return components_.at(r_index).at(v); }

  bool contains(std::size_t r_index, std::size_t v, Mask s) const {
    const auto& c = component(r_index, v);
    return std::binary_search(c.begin(), c.end(), s);
  }

  /// Largest gap between consecutive grid points (starting from 0).
  double resolution() const {
    double h = grid_.front();
    for (std::size_t k = 1; k < grid_.size(); ++k) h = std::max(h, grid_[k] - grid_[k - 1]);
    return h;
  }

 private:
  GeneralizedTruthObjectFamily(DensityState rho, PresheafPtr sigma, std::vector<double> grid)
      : rho_(std::move(rho)), sigma_(std::move(sigma)), grid_(std::move(grid)) {}

  DensityState rho_;
  PresheafPtr sigma_;
  std::vector<double> grid_;
  std::vector<std::vector<std::vector<Mask>>> components_;  // [r][context] -> sorted masks
};

/// values(V) = max{ r in grid : S_V in T_r;V }, 0 if none.
inline AntitoneValuation measureFromFamily(const GeneralizedTruthObjectFamily& family, const ClopenSubobject& s) {
  if (family.presheaf() != s.presheaf()) throw Error(ErrorCode::PresheafMismatch, "family built on another presheaf");
  AntitoneValuation g;
  g.values.assign(s.presheaf()->size(), 0.0);
  for (std::size_t v = 0; v < g.values.size(); ++v) {
    for (std::size_t k = family.grid().size(); k-- > 0;) {
      if (family.contains(k, v, s.component(v))) {
        g.values[v] = family.grid()[k];
        break;
      }
    }
  }
  return g;
}

/// Least subobject of measure 1: stage-wise the atoms carrying nonzero
/// psi-probability.
inline ClopenSubobject supportOfMeasure(const PureState& psi, const PresheafPtr& sigma) {
  check_same_dim(psi.dim(), sigma->poset().dim());
  const double eps = sigma->tolerances().num;
  std::vector<Mask> comps(sigma->size(), 0);
  for (std::size_t v = 0; v < sigma->size(); ++v) {
    const auto& ctx = sigma->context(v);
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      // <psi|a|psi> = |a psi|^2; compare the norm so the threshold sits above rounding noise.
      if ((ctx.atom(i).matrix() * psi.amplitudes()).norm() > eps) comps[v] |= Mask{1} << i;
    }
  }
  return ClopenSubobject::from_components(sigma, std::move(comps));
}

/// Rank-1 density input; anything else is NotPure.
inline ClopenSubobject supportOfMeasure(const DensityState& rho, const PresheafPtr& sigma) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const auto& ev = es.eigenvalues();
  const double eps = sigma->tolerances().num;
  const Eigen::Index n = ev.size();
  if (std::abs(ev(n - 1) - 1.0) > eps || (n > 1 && std::abs(ev(n - 2)) > eps)) {
    throw Error(ErrorCode::NotPure, "density matrix has rank greater than one");
  }
  return supportOfMeasure(PureState::normalised(es.eigenvectors().col(n - 1)), sigma);
}

// ---------------------------------------------------------------------------
// State reconstruction

struct AtomKey {
  std::string context;
  std::size_t atom;

  friend auto operator<=>(const AtomKey&, const AtomKey&) = default;
};

using AtomProbabilities = std::map<AtomKey, double>;

/// tr(rho a) for every atom of every context.
inline AtomProbabilities atomProbabilities(const DensityState& rho, const SpectralPresheaf& sigma) {
  AtomProbabilities out;
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    const auto& ctx = sigma.context(v);
    for (std::size_t i = 0; i < ctx.size(); ++i) out[{ctx.id(), i}] = rho.expectation(ctx.atom(i));
  }
  return out;
}

struct Reconstruction {
  DensityState state;
  double residual;  // max |tr(rho a) - p_a| over the supplied data
};

namespace detail {
// Real coordinates of a Hermitian matrix: diagonal, then (re, im) of each
// strictly upper entry.
inline Matrix hermitian_from_coordinates(const Eigen::VectorXd& x, Eigen::Index d) {
  Matrix m = Matrix::Zero(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) m(i, i) = x(k++);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      m(i, j) = Complex(x(k), x(k + 1));
      m(j, i) = Complex(x(k), -x(k + 1));
      k += 2;
    }
  }
  return m;
}

// Row of the linear functional rho -> tr(rho a) in those coordinates.
inline Eigen::RowVectorXd trace_functional(const Matrix& a) {
  const Eigen::Index d = a.rows();
  Eigen::RowVectorXd row(d * d);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) row(k++) = a(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      // tr(rho a) picks up rho_ij a_ji + rho_ji a_ij = 2 Re(rho_ij a_ji).
      row(k) = 2.0 * a(j, i).real();
      row(k + 1) = -2.0 * a(j, i).imag();
      k += 2;
    }
  }
  return row;
}
}  // namespace detail

/// Least-squares solve of tr(rho a) = p_a over Hermitian unit-trace rho.
inline Reconstruction reconstructState(const SpectralPresheaf& sigma, const AtomProbabilities& data) {
  const Tolerances& tol = sigma.tolerances();
  const auto d = static_cast<Eigen::Index>(sigma.poset().dim());

  std::vector<std::pair<Eigen::RowVectorXd, double>> rows;
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    const auto& ctx = sigma.context(v);
    double total = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      const auto it = data.find({ctx.id(), i});
      if (it == data.end()) continue;
      if (it->second < -tol.meas || it->second > 1.0 + tol.meas) {
        throw Error(ErrorCode::InconsistentData, "probability outside [0, 1] at '" + ctx.id() + "'");
      }
      total += it->second;
      rows.emplace_back(detail::trace_functional(ctx.atom(i).matrix()), it->second);
    }
    if (std::abs(total - 1.0) > tol.meas && total != 0.0) {
      throw Error(ErrorCode::InconsistentData, "probabilities at '" + ctx.id() + "' do not sum to 1");
    }
  }
  rows.emplace_back(detail::trace_functional(Matrix::Identity(d, d)), 1.0);

  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), d * d);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    a.row(static_cast<Eigen::Index>(r)) = rows[r].first;
    b(static_cast<Eigen::Index>(r)) = rows[r].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < d * d) {
    throw Error(ErrorCode::Underdetermined, "atoms span " + std::to_string(qr.rank()) + " of " +
                                                std::to_string(d * d) + " Hermitian dimensions");
  }
  const Eigen::VectorXd x = qr.solve(b);
  const double residual = (a * x - b).cwiseAbs().maxCoeff();
  if (residual > 1e-6) {
    throw Error(ErrorCode::InconsistentData, "least-squares residual " + std::to_string(residual));
  }
  Matrix rho = detail::hermitian_from_coordinates(x, d);
  try {
    return {DensityState::from(rho, Tolerances{1e-6, tol.cluster, tol.meas}), residual};
  } catch (const Error&) {
    throw Error(ErrorCode::InconsistentData, "reconstructed operator is not a density matrix");
  }
}

}  // namespace toposq
