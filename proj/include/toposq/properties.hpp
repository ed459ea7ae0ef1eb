#pragma once

// Property suites run by `toposq axioms` and the acceptance test: the six
// daseinisation properties, the Heyting-algebra laws of Sub_cl(Sigma), and the
// measure axioms. Every check is seeded and reports a JSON witness.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toposq/measures.hpp"
#include "toposq/random.hpp"
#include "toposq/scenario.hpp"

namespace toposq {

struct Check {
  enum class Status { pass, fail, info, skip };

  std::string name;
  Status status = Status::pass;
  std::string detail;
  Json witness = nullptr;

  bool failed() const { return status == Status::fail; }
};

inline const char* to_string(Check::Status s) {
  switch (s) {
    case Check::Status::pass: return "pass";
    case Check::Status::fail: return "fail";
    case Check::Status::info: return "info";
    case Check::Status::skip: return "skip";
  }
  return "?";
}

inline Json checkJson(const Check& c) {
  Json j = {{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}};
  if (!c.witness.is_null()) j["witness"] = c.witness;
  return j;
}

/// {context id: [character indices]} in canonical context order.
inline Json subobjectJson(const ClopenSubobject& s) {
  Json j = Json::object();
  const auto& sigma = *s.presheaf();
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    Json ids = Json::array();
    for (std::size_t i = 0; i < sigma.spectrum_size(v); ++i) {
      if (has_bit(s.component(v), i)) ids.push_back(i);
    }
    j[sigma.context(v).id()] = ids;
  }
  return j;
}

namespace detail {

// A projection together with how it was produced, for witnesses.
struct Labelled {
  Projection p;
  std::string label;
};

inline std::vector<Labelled> context_blocks(const SpectralPresheaf& sigma) {
  std::vector<Labelled> out;
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    const auto& ctx = sigma.context(v);
    for (Mask m = 0; m <= full_mask(ctx.size()); ++m) {
      const auto b = ctx.block(m);
      const bool seen = std::any_of(out.begin(), out.end(),
                                    [&](const Labelled& l) { return approx_equal(l.p, b, sigma.tolerances()); });
      if (seen) continue;
      std::string label = "block {";
      for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (has_bit(m, i)) label += (label.back() == '{' ? "" : ",") + std::to_string(i);
      }
      out.push_back({b, label + "} of " + ctx.id()});
    }
  }
  return out;
}

inline bool is_top(const ClopenSubobject& s) { return s == ClopenSubobject::full(s.presheaf()); }

// A subprojection P < Q: both spanned by leading columns of one unitary.
template <class Rng>
std::pair<Projection, Projection> strict_pair(std::size_t dim, Rng& rng) {
  std::uniform_int_distribution<std::size_t> qr(1, dim);
  const std::size_t q_rank = qr(rng);
  std::uniform_int_distribution<std::size_t> pr(0, q_rank - 1);
  const std::size_t p_rank = pr(rng);
  const Matrix u = randomUnitary(dim, rng);
  auto span = [&](std::size_t k) {
    const Matrix b = u.leftCols(static_cast<Eigen::Index>(k));
    return Projection::unchecked(hermitian_part(b * b.adjoint()));
  };
  return {span(p_rank), span(q_rank)};
}

// Unit vectors from the atoms of the maximal contexts, and equal-weight
// superpositions of two atoms of one context.
inline std::vector<std::pair<PureState, std::string>> probe_states(const SpectralPresheaf& sigma) {
  const auto& poset = sigma.poset();
  std::vector<std::pair<PureState, std::string>> out;
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    bool maximal = true;
    for (std::size_t w = 0; w < sigma.size(); ++w) maximal = maximal && (w == v || !poset.leq(v, w));
    if (!maximal) continue;
    const auto& ctx = sigma.context(v);
    std::vector<Vector> vs;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      const Matrix& a = ctx.atom(i).matrix();
      Eigen::Index col = 0;
      a.colwise().norm().maxCoeff(&col);
      vs.push_back(a.col(col).normalized());
      out.push_back({PureState::normalised(vs.back()), "atom " + std::to_string(i) + " of " + ctx.id()});
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        out.push_back({PureState::normalised(vs[i] + vs[j]),
                       "atoms " + std::to_string(i) + "+" + std::to_string(j) + " of " + ctx.id()});
      }
    }
  }
  return out;
}

}  // namespace detail

/// Properties (1)-(6) of outer daseinisation plus local/global consistency.
inline std::vector<Check> daseinisationSuite(const PresheafPtr& sigma, std::size_t samples, std::uint64_t seed) {
  const auto& poset = sigma->poset();
  const Tolerances& tol = sigma->tolerances();
  const std::size_t dim = poset.dim();
  std::mt19937_64 rng(seed);
  std::vector<Check> out;
  const std::string n = std::to_string(samples);

  std::vector<Projection> pool;
  for (std::size_t k = 0; k < samples; ++k) pool.push_back(randomProjection(dim, rng));

  {  // (1)
    Check c{"order_preservation"};
    std::size_t weak_failures = 0, strict_failures = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto [p, q] = detail::strict_pair(dim, rng);
      const auto dp = daseinise(p, sigma);
      const auto dq = daseinise(q, sigma);
      if (!leq(dp, dq)) ++weak_failures;
      if (!leq(dp, dq) || dp == dq) {
        if (++strict_failures == 1) {
          c.witness = {{"sample", k}, {"rank_P", p.rank()}, {"rank_Q", q.rank()}, {"delta_P", subobjectJson(dp)},
                       {"delta_Q", subobjectJson(dq)}};
        }
      }
    }
    if (samples == 0) {
      c.status = Check::Status::skip;
      c.detail = "no samples";
    } else {
      c.status = strict_failures == 0 ? Check::Status::pass : Check::Status::fail;
      c.detail = "P < Q => delta(P) < delta(Q): " + std::to_string(samples - strict_failures) + "/" + n +
                 " strict; delta(P) <= delta(Q): " + std::to_string(samples - weak_failures) + "/" + n;
    }
    out.push_back(std::move(c));
  }

  const auto blocks = detail::context_blocks(*sigma);
  {  // (2), split into the context projections and the full test set
    std::vector<detail::Labelled> inputs = blocks;
    const std::size_t n_blocks = inputs.size();
    for (std::size_t k = 0; k < samples; ++k) {
      inputs.push_back({randomProjection(dim, 1, rng), "random rank-1 #" + std::to_string(k)});
    }
    std::vector<ClopenSubobject> images;
    for (const auto& in : inputs) images.push_back(daseinise(in.p, sigma));
    auto scan = [&](std::size_t limit, Check& c) {
      std::size_t collisions = 0, top = 0;
      for (std::size_t i = 0; i < limit; ++i) {
        top += detail::is_top(images[i]);
        for (std::size_t j = i + 1; j < limit; ++j) {
          if (images[i] != images[j] || approx_equal(inputs[i].p, inputs[j].p, tol)) continue;
          if (++collisions == 1) {
            c.witness = {{"first", inputs[i].label}, {"second", inputs[j].label}, {"image", subobjectJson(images[i])}};
          }
        }
      }
      c.status = collisions == 0 ? Check::Status::pass : Check::Status::fail;
      c.detail = std::to_string(limit) + " distinct projections, " + std::to_string(collisions) +
                 " colliding pairs, " + std::to_string(top) + " map to Sigma";
    };
    Check blocks_check{"injectivity_context_projections"};
    scan(n_blocks, blocks_check);
    out.push_back(std::move(blocks_check));
    Check all{"injectivity"};
    scan(inputs.size(), all);
    all.detail = "context projections + " + n + " random rank-1: " + all.detail;
    out.push_back(std::move(all));
  }

  {  // (3)
    Check c{"bounds"};
    const bool ok = daseinise(Projection::zero(dim), sigma) == ClopenSubobject::empty(sigma) &&
                    daseinise(Projection::identity(dim), sigma) == ClopenSubobject::full(sigma);
    c.status = ok ? Check::Status::pass : Check::Status::fail;
    c.detail = "delta(0) = 0 and delta(1) = Sigma";
    out.push_back(std::move(c));
  }

  {  // (4)
    Check c{"join_preservation"};
    std::size_t failures = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto& p = pool[k];
      const auto q = randomProjection(dim, rng);
      const auto lhs = daseinise(projectionJoin(p, q, tol), sigma);
      const auto rhs = join(daseinise(p, sigma), daseinise(q, sigma));
      if (lhs != rhs && ++failures == 1) {
        c.witness = {{"sample", k}, {"lhs", subobjectJson(lhs)}, {"rhs", subobjectJson(rhs)}};
      }
    }
    bool big_ok = true;
    if (!pool.empty()) {
      Projection acc = Projection::zero(dim);
      auto rhs = ClopenSubobject::empty(sigma);
      for (const auto& p : pool) {
        acc = projectionJoin(acc, p, tol);
        rhs = join(rhs, daseinise(p, sigma));
      }
      big_ok = daseinise(acc, sigma) == rhs;
    }
    c.status = failures == 0 && big_ok ? Check::Status::pass : Check::Status::fail;
    c.detail = std::to_string(samples - failures) + "/" + n + " binary joins exact; join of all samples " +
               (big_ok ? "exact" : "differs");
    out.push_back(std::move(c));
  }

  {  // (5)
    Check c{"meet_inequality"};
    std::size_t failures = 0, strict_subobject = 0;
    for (std::size_t k = 0; k < samples; ++k) {
      const auto& p = pool[k];
      const auto q = randomProjection(dim, rng);
      const auto lhs = daseinise(projectionMeet(p, q, tol), sigma);
      const auto rhs = meet(daseinise(p, sigma), daseinise(q, sigma));
      if (!leq(lhs, rhs)) ++failures;
      else if (lhs != rhs) ++strict_subobject;
    }
    // Stage-wise witness: P not in V, yet delta(P)_V and delta(1-P)_V overlap.
    std::vector<detail::Labelled> candidates = blocks;
    for (std::size_t k = 0; k < pool.size(); ++k) candidates.push_back({pool[k], "random #" + std::to_string(k)});
    for (const auto& cand : candidates) {
      for (std::size_t v = 0; v < sigma->size() && c.witness.is_null(); ++v) {
        const auto& ctx = sigma->context(v);
        const auto dp = daseiniseAt(cand.p, ctx, tol);
        if (approx_equal(dp, cand.p, tol)) continue;
        const auto both = projectionMeet(dp, daseiniseAt(cand.p.complement(), ctx, tol), tol);
        if (!is_zero(both, tol)) {
          c.witness = {{"P", cand.label}, {"context", ctx.id()}, {"rank_of_meet", both.rank()}};
        }
      }
      if (!c.witness.is_null()) break;
    }
    c.status = failures == 0 && !c.witness.is_null() ? Check::Status::pass : Check::Status::fail;
    c.detail = "delta(P ^ Q) <= delta(P) ^ delta(Q): " + std::to_string(samples - failures) + "/" + n + " (" +
               std::to_string(strict_subobject) + " strict); stage witness " +
               (c.witness.is_null() ? "not found" : "found");
    out.push_back(std::move(c));
  }

  {  // (6)
    Check c{"non_surjectivity"};
    std::vector<ClopenSubobject> block_images;
    for (const auto& b : blocks) block_images.push_back(daseinise(b.p, sigma));
    const auto probes = detail::probe_states(*sigma);
    for (std::size_t i = 0; i < probes.size() && c.witness.is_null(); ++i) {
      for (std::size_t j = i + 1; j < probes.size() && c.witness.is_null(); ++j) {
        const Complex overlap = probes[i].first.amplitudes().dot(probes[j].first.amplitudes());
        if (std::abs(overlap) <= tol.num || std::abs(std::abs(overlap) - 1.0) <= tol.num) continue;
        const auto target = meet(pseudoState(probes[i].first, sigma), pseudoState(probes[j].first, sigma));
        bool hit = std::find(block_images.begin(), block_images.end(), target) != block_images.end();
        for (std::size_t v = 0; v < sigma->size() && !hit; ++v) {
          hit = daseinise(alphaInverse(sigma->context(v), target.component(v)), sigma) == target;
        }
        if (!hit) {
          c.witness = {{"psi1", probes[i].second}, {"psi2", probes[j].second}, {"meet", subobjectJson(target)}};
        }
      }
    }
    c.status = c.witness.is_null() ? Check::Status::fail : Check::Status::pass;
    c.detail = c.witness.is_null() ? "every probed meet of pseudo-states is a daseinisation"
                                   : "meet of two pseudo-states is not delta(R) for any candidate R";
    out.push_back(std::move(c));
  }

  {
    Check c{"local_global_consistency"};
    std::size_t failures = 0;
    for (const auto& p : pool) {
      const auto s = daseinise(p, sigma);
      for (std::size_t v = 0; v < sigma->size(); ++v) {
        failures += alpha(sigma->context(v), daseiniseAt(p, sigma->context(v), tol), tol) != s.component(v);
      }
    }
    c.status = failures == 0 ? Check::Status::pass : Check::Status::fail;
    c.detail = "alpha(daseiniseAt(P, V)) = delta(P)_V at every stage, " + n + " samples";
    out.push_back(std::move(c));
  }

  {
    Check c{"restriction_equality", Check::Status::info};
    std::size_t equal = 0;
    for (const auto& p : pool) equal += restriction_equality_holds(daseinise(p, sigma));
    c.detail = std::to_string(equal) + "/" + n + " samples restrict with equality (inclusion always holds)";
    out.push_back(std::move(c));
  }
  return out;
}

/// Heyting-algebra laws of Sub_cl(Sigma). Exhaustive over all triples when the
/// algebra is small enough to enumerate, otherwise over seeded random triples.
inline std::vector<Check> heytingSuite(const PresheafPtr& sigma, std::size_t samples, std::uint64_t seed) {
  constexpr std::size_t kExhaustiveLimit = 160;  // 160^3 triples
  std::vector<ClopenSubobject> all;
  bool exhaustive = false;
  try {
    all = enumerateSubobjects(sigma);
    exhaustive = all.size() <= kExhaustiveLimit;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::Capacity) throw;
  }
  std::mt19937_64 rng(seed);
  std::vector<std::array<ClopenSubobject, 3>> triples;
  if (exhaustive) {
    for (const auto& a : all) {
      for (const auto& b : all) {
        for (const auto& z : all) triples.push_back({a, b, z});
      }
    }
  } else {
    for (std::size_t k = 0; k < samples; ++k) {
      auto a = randomSubobject(sigma, rng);
      auto b = randomSubobject(sigma, rng);
      auto z = randomSubobject(sigma, rng);
      triples.push_back({std::move(a), std::move(b), std::move(z)});
    }
  }
  const std::string scope = exhaustive ? "all " + std::to_string(all.size()) + "^3 triples"
                                       : std::to_string(triples.size()) + " random triples";

  std::vector<Check> out;
  Check dist{"distributivity"}, adj{"adjunction"}, pc{"pseudo_complement"};
  Check lem{"excluded_middle", Check::Status::info}, dn{"double_negation"};
  std::size_t dist_fail = 0, adj_fail = 0, pc_fail = 0, dn_fail = 0;
  std::optional<ClopenSubobject> lem_witness, dn_witness;
  const auto top = ClopenSubobject::full(sigma);
  const auto bottom = ClopenSubobject::empty(sigma);
  for (const auto& [a, b, z] : triples) {
    if (meet(a, join(b, z)) != join(meet(a, b), meet(a, z)) || join(a, meet(b, z)) != meet(join(a, b), join(a, z))) {
      if (++dist_fail == 1) dist.witness = {{"a", subobjectJson(a)}, {"b", subobjectJson(b)}, {"c", subobjectJson(z)}};
    }
    if (leq(meet(z, a), b) != leq(z, implies(a, b))) {
      if (++adj_fail == 1) {
        adj.witness = {{"Z", subobjectJson(z)}, {"S1", subobjectJson(a)}, {"S2", subobjectJson(b)}};
      }
    }
  }
  // Unary laws once per distinct first element.
  std::vector<ClopenSubobject> singles = exhaustive ? all : std::vector<ClopenSubobject>{};
  if (!exhaustive) {
    for (const auto& t : triples) singles.push_back(t[0]);
  }
  for (const auto& a : singles) {
    const auto na = negate(a);
    if (meet(a, na) != bottom) ++pc_fail;
    if (!lem_witness && join(a, na) != top) lem_witness = a;
    const auto nna = negate(na);
    if (!leq(a, nna)) ++dn_fail;
    else if (!dn_witness && nna != a) dn_witness = a;
  }

  auto finish = [&](Check& c, std::size_t failures, const std::string& law) {
    c.status = failures == 0 ? Check::Status::pass : Check::Status::fail;
    c.detail = law + ": " + std::to_string(failures) + " failures over " + scope;
    if (triples.empty()) {
      c.status = Check::Status::skip;
      c.detail = "no samples";
    }
  };
  finish(dist, dist_fail, "a ^ (b v c) = (a ^ b) v (a ^ c) and dual");
  finish(adj, adj_fail, "Z ^ S1 <= S2 iff Z <= (S1 => S2)");
  finish(pc, pc_fail, "a ^ -a = 0");
  finish(dn, dn_fail, "a <= --a");
  if (dn_witness && dn.status == Check::Status::pass) {
    const auto nn = negate(negate(*dn_witness));
    dn.detail += "; strict for S";
    dn.witness = {{"S", subobjectJson(*dn_witness)}, {"not_not_S", subobjectJson(nn)}};
  }
  if (lem_witness) {
    const auto na = negate(*lem_witness);
    lem.detail = "a v -a < 1 (strict witness)";
    lem.witness = {{"S", subobjectJson(*lem_witness)}, {"not_S", subobjectJson(na)},
                   {"S_or_not_S", subobjectJson(join(*lem_witness, na))}};
  } else {
    lem.detail = "a v -a = 1 for every subobject checked";
  }
  for (auto* c : {&dist, &adj, &pc, &lem, &dn}) out.push_back(std::move(*c));
  return out;
}

/// Measure axioms for each listed state.
inline std::vector<Check> measureSuite(const PresheafPtr& sigma, const std::vector<NamedState>& states,
                                       std::size_t samples, std::uint64_t seed) {
  std::vector<Check> out;
  const double eps = sigma->tolerances().meas;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto report = verifyMeasureAxioms(states[i].density(), sigma, samples, seed + i);
    Check c{"measure_axioms[" + states[i].name + "]"};
    c.status = report.passed(eps) ? Check::Status::pass : Check::Status::fail;
    c.detail = "normalisation " + Json(report.normalisation_violation).dump() + ", additivity " +
               Json(report.additivity_violation).dump() + ", antitonicity " +
               Json(report.antitonicity_violation).dump() + " over " + std::to_string(samples) + " pairs";
    if (samples == 0) c.detail += " (no samples)";
    if (report.witness) {
      c.witness = {{"S1", subobjectJson(report.witness->first)},
                   {"S2", subobjectJson(report.witness->second)},
                   {"context", sigma->context(report.witness->context).id()}};
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace toposq
