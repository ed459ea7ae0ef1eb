#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "toposq/measures.hpp"
#include "toposq/random.hpp"

namespace toposq {
namespace {

using namespace toposq::test;

constexpr double kMeas = 1e-9;

std::vector<PresheafPtr> reference_posets() { return {poset_a(), poset_b(), poset_mermin()}; }

DensityState mixed(std::vector<double> d) { return DensityState::from(diag(std::move(d))); }

TEST(Measure, Examples) {
  for (const auto& sigma : reference_posets()) {
    std::mt19937_64 rng(2);
    const auto rho = randomDensity(sigma->poset().dim(), rng);
    for (double x : measure(rho, ClopenSubobject::full(sigma)).values) EXPECT_NEAR(x, 1.0, kMeas);
    for (double x : measure(rho, ClopenSubobject::empty(sigma)).values) EXPECT_NEAR(x, 0.0, kMeas);
  }
  const auto sigma = poset_a();
  const auto g = measure(DensityState::maximally_mixed(2), daseinise(p0(), sigma));
  EXPECT_NEAR(g.at(sigma->poset().index_of("V_z")), 0.5, kMeas);
  EXPECT_NEAR(g.at(sigma->poset().index_of("V_x")), 1.0, kMeas);
}

TEST(Measure, AxiomsHoldForRandomStates) {
  std::mt19937_64 rng(61);
  for (const auto& sigma : reference_posets()) {
    for (int k = 0; k < 20; ++k) {
      const auto rho = randomDensity(sigma->poset().dim(), rng);
      const auto report = verifyMeasureAxioms(rho, sigma, 20, 1000 + k);
      EXPECT_TRUE(report.passed(kMeas)) << report.max_violation();
      EXPECT_FALSE(report.witness.has_value());
    }
  }
  const auto sigma = poset_a();
  EXPECT_TRUE(verifyMeasureAxioms(DensityState::pure(zero()), sigma, 100, 42).passed(kMeas));
  EXPECT_TRUE(verifyMeasureAxioms(DensityState::maximally_mixed(2), sigma, 100, 42).passed(kMeas));
}

TEST(Measure, AxiomReportIsDeterministic) {
  std::mt19937_64 rng(67);
  const auto sigma = poset_mermin();
  const auto rho = randomDensity(4, rng);
  const auto a = verifyMeasureAxioms(rho, sigma, 20, 7);
  const auto b = verifyMeasureAxioms(rho, sigma, 20, 7);
  EXPECT_EQ(a.additivity_violation, b.additivity_violation);
  EXPECT_EQ(a.normalisation_violation, b.normalisation_violation);
}

TEST(Measure, PureStatesMatchTruthValues) {
  std::mt19937_64 rng(71);
  for (const auto& sigma : {poset_a(), poset_b()}) {
    const auto& poset = sigma->poset();
    const auto all = enumerateSubobjects(sigma);
    for (int k = 0; k < 5; ++k) {
      const auto psi = randomPureState(poset.dim(), rng);
      const auto rho = DensityState::pure(psi);
      EXPECT_EQ(supportOfMeasure(psi, sigma), pseudoState(psi, sigma));
      EXPECT_EQ(supportOfMeasure(rho, sigma), pseudoState(psi, sigma));
      for (const auto& s : all) {
        const auto g = measure(rho, s);
        const auto t = truthValue(psi, s);
        for (std::size_t v = 0; v < poset.size(); ++v) {
          EXPECT_EQ(g.at(v) >= 1.0 - kMeas, is_maximal(poset, t.at(v)));
        }
      }
    }
  }
}

TEST(Support, Examples) {
  const auto sigma = poset_a();
  EXPECT_EQ(supportOfMeasure(zero(), sigma), pseudoState(zero(), sigma));
  const auto sp = supportOfMeasure(plus(), sigma);
  EXPECT_EQ(sp.component(sigma->poset().index_of("V_z")), full_mask(2));
  EXPECT_EQ(sp.component(sigma->poset().index_of("V_x")), alpha(context_x(), p_plus()));
  const auto b = poset_b();
  EXPECT_EQ(supportOfMeasure(basis(3, 0), b).component(b->poset().index_of("V3")), alpha(context_v3(), e(0)));
  try {
    supportOfMeasure(DensityState::maximally_mixed(2), sigma);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NotPure);
  }
}

TEST(GeneralizedTruthObject, Examples) {
  const auto vz = context_z();
  const Mask l0 = alpha(vz, p0());
  const auto pure0 = DensityState::pure(zero());
  EXPECT_EQ(generalizedTruthObjectComponent(pure0, 1.0, vz), truthObjectComponent(zero(), vz));
  EXPECT_EQ(generalizedTruthObjectComponent(pure0, 1.0, vz), (std::vector<Mask>{l0, full_mask(2)}));
  EXPECT_EQ(generalizedTruthObjectComponent(mixed({0.75, 0.25}), 0.8, vz), (std::vector<Mask>{full_mask(2)}));
  const auto low = generalizedTruthObjectComponent(mixed({0.75, 0.25}), 1e-9, vz);
  EXPECT_EQ(low.back(), full_mask(2));
  EXPECT_EQ(low.size(), 3U);
  for (double r : {0.0, -0.1, 1.5}) {
    try {
      generalizedTruthObjectComponent(pure0, r, vz);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::BadThreshold);
    }
  }
}

TEST(GeneralizedTruthObject, FamilyIsNestedAndReconstructsTheMeasure) {
  std::mt19937_64 rng(73);
  for (const auto& sigma : reference_posets()) {
    for (int k = 0; k < 5; ++k) {
      const auto rho = randomDensity(sigma->poset().dim(), rng);
      const auto family = GeneralizedTruthObjectFamily::build(rho, sigma);
      EXPECT_NEAR(family.resolution(), 0.05, 1e-12);
      for (std::size_t r = 0; r + 1 < family.grid().size(); ++r) {
        for (std::size_t v = 0; v < sigma->size(); ++v) {
          for (Mask s : family.component(r + 1, v)) EXPECT_TRUE(family.contains(r, v, s));
        }
      }
      for (int j = 0; j < 10; ++j) {
        const auto s = randomSubobject(sigma, rng);
        const auto exact = measure(rho, s);
        const auto coarse = measureFromFamily(family, s);
        for (std::size_t v = 0; v < sigma->size(); ++v) {
          EXPECT_LE(coarse.at(v), exact.at(v) + kMeas);
          EXPECT_LE(exact.at(v) - coarse.at(v), 0.05 + kMeas);
        }
      }
    }
  }
}

TEST(GeneralizedTruthObject, PureStateAtOneIsTheTruthObject) {
  std::mt19937_64 rng(79);
  for (const auto& sigma : {poset_a(), poset_b()}) {
    for (int k = 0; k < 10; ++k) {
      const auto psi = randomPureState(sigma->poset().dim(), rng);
      for (std::size_t v = 0; v < sigma->size(); ++v) {
        EXPECT_EQ(generalizedTruthObjectComponent(DensityState::pure(psi), 1.0, sigma->context(v)),
                  truthObjectComponent(psi, sigma->context(v)));
      }
    }
  }
}

TEST(GeneralizedTruthObject, MeasureFromFamilyExamples) {
  const auto sigma = poset_a();
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(0.1 * k);
  const auto family = GeneralizedTruthObjectFamily::build(DensityState::maximally_mixed(2), sigma, grid);
  EXPECT_NEAR(measureFromFamily(family, daseinise(p0(), sigma)).at(sigma->poset().index_of("V_z")), 0.5, kMeas);
  for (double x : measureFromFamily(family, ClopenSubobject::full(sigma)).values) EXPECT_NEAR(x, 1.0, kMeas);
  for (double x : measureFromFamily(family, ClopenSubobject::empty(sigma)).values) EXPECT_EQ(x, 0.0);
  EXPECT_THROW(measureFromFamily(family, ClopenSubobject::full(poset_a())), Error);
  EXPECT_THROW(GeneralizedTruthObjectFamily::build(DensityState::maximally_mixed(2), sigma, {0.5, 0.2}), Error);
}

TEST(Reconstruct, QubitAndQutritRoundTrip) {
  std::mt19937_64 rng(83);
  for (const auto& sigma : {poset_xyz(), poset_qutrit_mub()}) {
    for (int k = 0; k < 20; ++k) {
      const auto rho = randomDensity(sigma->poset().dim(), rng);
      const auto out = reconstructState(*sigma, atomProbabilities(rho, *sigma));
      EXPECT_LE(max_abs(out.state.matrix() - rho.matrix()), 1e-6);
      EXPECT_LE(out.residual, 1e-6);
    }
  }
}

TEST(Reconstruct, Examples) {
  const auto sigma = poset_xyz();
  const auto rho = mixed({0.75, 0.25});
  EXPECT_LE(max_abs(reconstructState(*sigma, atomProbabilities(rho, *sigma)).state.matrix() - rho.matrix()), 1e-6);

  AtomProbabilities flat;
  for (std::size_t v = 0; v < sigma->size(); ++v) {
    for (std::size_t i = 0; i < sigma->spectrum_size(v); ++i) {
      flat[{sigma->context(v).id(), i}] = 1.0 / static_cast<double>(sigma->spectrum_size(v));
    }
  }
  EXPECT_LE(max_abs(reconstructState(*sigma, flat).state.matrix() - DensityState::maximally_mixed(2).matrix()), 1e-6);
}

TEST(Reconstruct, Failures) {
  const auto z_only = make_presheaf(buildPoset({context_z()}, Closure::subalgebras));
  try {
    reconstructState(*z_only, atomProbabilities(DensityState::maximally_mixed(2), *z_only));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::Underdetermined);
  }
  const auto sigma = poset_xyz();
  auto data = atomProbabilities(DensityState::maximally_mixed(2), *sigma);
  data.begin()->second = 1.4;
  try {
    reconstructState(*sigma, data);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::InconsistentData);
  }
  // Each context sums to one, but no state has these statistics: all three
  // Bloch components equal to 1.
  AtomProbabilities pure_everywhere;
  for (std::size_t v = 0; v < sigma->size(); ++v) {
    const auto& ctx = sigma->context(v);
    pure_everywhere[{ctx.id(), 0}] = 1.0;
    pure_everywhere[{ctx.id(), 1}] = 0.0;
  }
  try {
    reconstructState(*sigma, pure_everywhere);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::InconsistentData);
  }
}

}  // namespace
}  // namespace toposq
