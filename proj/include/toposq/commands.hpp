#pragma once

// The CLI subcommands as plain functions returning {exit code, text, json}, so
// they can be tested without spawning a process. Exit codes: 0 success,
// 1 a property failure was found, 2 input error (raised as toposq::Error and
// mapped by the caller).

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "toposq/model.hpp"
#include "toposq/properties.hpp"
#include "toposq/proposition.hpp"

namespace toposq {

struct CommandResult {
  int exit_code = 0;
  std::string text;
  Json json;
};

/// Where a command gets its model from. Exactly one field is set.
struct Source {
  std::string model_path;
  std::string scenario_path;
  std::string preset;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// TOPOSQ_SEED if set and numeric, else 42.
inline std::uint64_t defaultSeed() {
  if (const char* env = std::getenv("TOPOSQ_SEED")) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return x;
  }
  return kDefaultSeed;
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Model loadSource(const Source& src) {
  const int given = !src.model_path.empty() + !src.scenario_path.empty() + !src.preset.empty();
  if (given != 1) throw Error(ErrorCode::ParseError, "give exactly one of --model, --scenario, --preset");
  if (!src.preset.empty()) return buildModel(preset(src.preset));
  if (!src.scenario_path.empty()) return buildModel(loadScenario(readFile(src.scenario_path)));
  return loadModel(readFile(src.model_path));
}

namespace detail {

inline Json source_json(const Source& src, const Model& m) {
  Json j = Json::object();
  if (!src.preset.empty()) j["preset"] = src.preset;
  if (!src.scenario_path.empty()) j["scenario"] = src.scenario_path;
  if (!src.model_path.empty()) j["model"] = src.model_path;
  j["name"] = m.scenario.name;
  j["contexts"] = m.sigma->size();
  return j;
}

inline std::string num(double x) { return Json(x).dump(); }

// Left-aligned text table.
inline std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out << r[c];
      if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

inline std::string ids_text(const ContextPoset& poset, const Sieve& s) {
  std::string out = "{";
  for (std::size_t w = 0; w < poset.size(); ++w) {
    if (s.contains(w)) out += (out.size() > 1 ? ", " : "") + poset.context(w).id();
  }
  return out + "}";
}

inline std::string mask_text(Mask m, std::size_t n) {
  std::string out = "{";
  for (std::size_t i = 0; i < n; ++i) {
    if (has_bit(m, i)) out += (out.size() > 1 ? "," : "") + std::to_string(i);
  }
  return out + "}";
}

inline Json mask_json(Mask m, std::size_t n) {
  Json j = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (has_bit(m, i)) j.push_back(i);
  }
  return j;
}

inline Json sieve_json(const ContextPoset& poset, const Sieve& s) {
  Json j = Json::array();
  for (std::size_t w = 0; w < poset.size(); ++w) {
    if (s.contains(w)) j.push_back(poset.context(w).id());
  }
  return j;
}

inline std::string checks_text(const std::string& title, const std::vector<Check>& checks) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : checks) rows.push_back({c.name, to_string(c.status), c.detail});
  std::string out = title + "\n" + table({"check", "status", "detail"}, rows);
  for (const auto& c : checks) {
    if (c.witness.is_null()) continue;
    std::string w = c.witness.dump();
    constexpr std::size_t kMaxWitness = 240;  // full witness stays in the JSON report
    if (w.size() > kMaxWitness) w = w.substr(0, kMaxWitness) + " ... (full witness in --format json)";
    out += "  witness " + c.name + ": " + w + "\n";
  }
  return out;
}

}  // namespace detail

inline CommandResult cmdBuild(const Source& src, const std::string& out_path) {
  const Model m = loadSource(src);
  const auto& poset = m.sigma->poset();
  const std::string doc = saveModel(m);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << doc)) throw Error(ErrorCode::ParseError, "cannot write '" + out_path + "'");
  }
  const Json meta = modelJson(m)["metadata"];
  CommandResult r;
  r.json = {{"command", "build"},
            {"source", detail::source_json(src, m)},
            {"results",
             {{"contexts", poset.size()},
              {"arrows", poset.arrows().size()},
              {"characters", poset.character_count()},
              {"generating_contexts", m.scenario.contexts.size()},
              {"checksum", meta["checksum"]},
              {"out", out_path}}}};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    std::size_t below = poset.down_set(v).size() - 1;
    rows.push_back({poset.context(v).id(), std::to_string(poset.context(v).size()), std::to_string(below)});
  }
  std::ostringstream t;
  t << "contexts " << poset.size() << "\narrows " << poset.arrows().size() << "\ncharacters "
    << poset.character_count() << "\n\n"
    << detail::table({"context", "atoms", "below"}, rows);
  if (!out_path.empty()) t << "\nmodel written to " << out_path << " (checksum " << meta["checksum"].get<std::string>() << ")\n";
  r.text = t.str();
  return r;
}

inline CommandResult cmdTruth(const Source& src, const std::string& state_name, const std::string& prop_text) {
  const Model m = loadSource(src);
  const auto& sigma = m.sigma;
  const auto& poset = sigma->poset();
  const NamedState& st = m.scenario.state(state_name);
  if (!st.is_pure()) throw Error(ErrorCode::NotPure, "state '" + state_name + "' is a density matrix");
  const PureState& psi = std::get<PureState>(st.state);
  const auto expr = parseProposition(prop_text);
  const auto s = evaluateProposition(*expr, m.scenario, sigma);
  const auto t = truthValue(psi, s);
  const bool all_true = t == totally_true(poset);
  const bool all_false = t == totally_false(poset);
  const Projection witness_space = totally_true_subspace(s);

  CommandResult r;
  Json per = Json::array();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    const bool local = t.at(v).contains(v);
    per.push_back({{"context", poset.context(v).id()}, {"local", local}, {"sieve", detail::sieve_json(poset, t.at(v))}});
    rows.push_back({poset.context(v).id(), local ? "true" : "false", detail::ids_text(poset, t.at(v))});
  }
  const std::string verdict = all_true ? "totally true" : all_false ? "totally false" : "partially true";
  r.json = {{"command", "truth"},
            {"source", detail::source_json(src, m)},
            {"results",
             {{"state", state_name},
              {"proposition", expr->to_string()},
              {"subobject", subobjectJson(s)},
              {"verdict", verdict},
              {"totally_true", all_true},
              {"totally_false", all_false},
              {"per_context", per},
              {"totally_true_subspace_rank", witness_space.rank()}}}};
  std::ostringstream out;
  out << "state " << state_name << ", proposition " << expr->to_string() << "\n\n"
      << detail::table({"context", "local", "sieve"}, rows) << "\n"
      << verdict << "\n";
  if (witness_space.rank() == 0) {
    out << "no state makes this proposition totally true: the ranges of its components intersect in 0\n";
  }
  r.text = out.str();
  return r;
}

inline CommandResult cmdMeasure(const Source& src, const std::string& state_name, const std::string& prop_text,
                                std::uint64_t seed) {
  const Model m = loadSource(src);
  const auto& sigma = m.sigma;
  const auto& poset = sigma->poset();
  const double eps = sigma->tolerances().meas;
  const NamedState& st = m.scenario.state(state_name);
  const auto expr = parseProposition(prop_text);
  const auto s = evaluateProposition(*expr, m.scenario, sigma);
  const auto g = measure(st.density(), s);
  const double violation = antitonicity_violation(poset, g);

  // {V : mu_psi(S)(V) = 1} against the maximal-sieve contexts of v_psi(S).
  auto bridge_holds = [&](const PureState& psi) {
    const auto mu = measure(DensityState::pure(psi), s);
    const auto t = truthValue(psi, s);
    for (std::size_t v = 0; v < poset.size(); ++v) {
      if ((mu.at(v) >= 1.0 - eps) != is_maximal(poset, t.at(v))) return false;
    }
    return true;
  };
  std::mt19937_64 rng(seed);
  std::size_t random_ok = 0;
  constexpr std::size_t kBridgeStates = 20;
  for (std::size_t k = 0; k < kBridgeStates; ++k) random_ok += bridge_holds(randomPureState(poset.dim(), rng));
  const bool state_ok = !st.is_pure() || bridge_holds(std::get<PureState>(st.state));
  const bool consistent = random_ok == kBridgeStates && state_ok;

  CommandResult r;
  Json values = Json::object();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    values[poset.context(v).id()] = g.at(v);
    rows.push_back({poset.context(v).id(), detail::num(g.at(v))});
  }
  r.json = {{"command", "measure"},
            {"source", detail::source_json(src, m)},
            {"results",
             {{"state", state_name},
              {"pure", st.is_pure()},
              {"proposition", expr->to_string()},
              {"values", values},
              {"antitone", violation <= eps},
              {"antitonicity_violation", violation},
              {"bridge", {{"seed", seed}, {"random_states", kBridgeStates}, {"random_consistent", random_ok},
                          {"state_consistent", state_ok}, {"consistent", consistent}}}}}};
  std::ostringstream out;
  out << "state " << state_name << (st.is_pure() ? " (pure)" : " (mixed)") << ", proposition " << expr->to_string()
      << "\n\n"
      << detail::table({"context", "value"}, rows) << "\nantitone: " << (violation <= eps ? "yes" : "no")
      << " (max violation " << detail::num(violation) << ")\n"
      << "bridge to truth values: " << (consistent ? "consistent" : "inconsistent") << " (" << random_ok << "/"
      << kBridgeStates << " random pure states, seed " << seed << (st.is_pure() ? ", and this state" : "") << ")\n";
  r.text = out.str();
  r.exit_code = violation <= eps && consistent ? 0 : 1;
  return r;
}

inline CommandResult cmdKs(const Source& src) {
  const Model m = loadSource(src);
  const auto& sigma = *m.sigma;
  const auto& poset = sigma.poset();
  const std::size_t count = countGlobalSections(sigma);
  const auto least = globalSectionSearch(sigma);

  CommandResult r;
  Json results = {{"global_sections", count}};
  std::ostringstream out;
  out << "global sections " << count << "\n";
  if (least) {
    Json sec = Json::object();
    std::vector<std::vector<std::string>> rows;
    for (std::size_t v = 0; v < poset.size(); ++v) {
      sec[poset.context(v).id()] = (*least)[v];
      rows.push_back({poset.context(v).id(), std::to_string((*least)[v])});
    }
    results["least_section"] = sec;
    out << "\nleast section\n" << detail::table({"context", "character"}, rows);
  } else {
    out << "no global section: the spectral presheaf admits no noncontextual value assignment\n";
  }
  if (m.scenario.report.value("show_contexts", false)) {
    std::vector<std::vector<std::string>> rows;
    Json ctx = Json::array();
    for (std::size_t v = 0; v < poset.size(); ++v) {
      rows.push_back({poset.context(v).id(), std::to_string(sigma.spectrum_size(v))});
      ctx.push_back({{"id", poset.context(v).id()}, {"characters", sigma.spectrum_size(v)}});
    }
    results["contexts"] = ctx;
    out << "\n" << detail::table({"context", "characters"}, rows);
  }
  r.json = {{"command", "ks"}, {"source", detail::source_json(src, m)}, {"results", results}};
  r.text = out.str();
  return r;
}

inline CommandResult cmdAxioms(const Source& src, std::size_t samples, std::uint64_t seed) {
  const Model m = loadSource(src);
  std::vector<NamedState> states = m.scenario.states;
  if (states.empty()) states.push_back({"maximally-mixed", DensityState::maximally_mixed(m.sigma->poset().dim())});
  const auto das = daseinisationSuite(m.sigma, samples, seed);
  const auto hey = heytingSuite(m.sigma, samples, seed);
  const auto mea = measureSuite(m.sigma, states, samples, seed);

  std::size_t failed = 0;
  Json groups = Json::object();
  for (const auto& [name, checks] : {std::pair{"daseinisation", &das}, {"heyting", &hey}, {"measures", &mea}}) {
    Json arr = Json::array();
    for (const auto& c : *checks) {
      arr.push_back(checkJson(c));
      failed += c.failed();
    }
    groups[name] = arr;
  }
  CommandResult r;
  r.json = {{"command", "axioms"},
            {"source", detail::source_json(src, m)},
            {"samples", samples},
            {"seed", seed},
            {"results", groups},
            {"failed", failed}};
  std::ostringstream out;
  out << "samples " << samples << ", seed " << seed << "\n";
  if (samples == 0) out << "no samples: sampled checks are skipped\n";
  out << "\n"
      << detail::checks_text("daseinisation", das) << "\n"
      << detail::checks_text("heyting", hey) << "\n"
      << detail::checks_text("measures", mea) << "\n"
      << (failed == 0 ? "all checks pass" : std::to_string(failed) + " check(s) failed") << "\n";
  r.text = out.str();
  r.exit_code = failed == 0 ? 0 : 1;
  return r;
}

inline CommandResult cmdDaseinise(const Source& src, const std::string& prop_text) {
  const Model m = loadSource(src);
  const auto& sigma = m.sigma;
  const auto& poset = sigma->poset();
  const auto expr = parseProposition(prop_text);
  const Projection p = atomProjection(*expr, m.scenario);
  const auto s = daseinise(p, sigma);

  CommandResult r;
  Json per = Json::array();
  std::vector<std::vector<std::string>> rows;
  for (std::size_t v = 0; v < poset.size(); ++v) {
    const auto& ctx = poset.context(v);
    const Projection d = daseiniseAt(p, ctx, sigma->tolerances());
    const bool exact = approx_equal(d, p, sigma->tolerances());
    per.push_back({{"context", ctx.id()},
                   {"component", detail::mask_json(s.component(v), ctx.size())},
                   {"rank", d.rank()},
                   {"equals_P", exact},
                   {"projection", matrix_json(d.matrix())}});
    rows.push_back({ctx.id(), detail::mask_text(s.component(v), ctx.size()), std::to_string(d.rank()),
                    exact ? "yes" : "no"});
  }
  r.json = {{"command", "daseinise"},
            {"source", detail::source_json(src, m)},
            {"results",
             {{"proposition", expr->to_string()},
              {"rank", p.rank()},
              {"per_context", per},
              {"restriction_equality", restriction_equality_holds(s)}}}};
  std::ostringstream out;
  out << "proposition " << expr->to_string() << " (rank " << p.rank() << ")\n\n"
      << detail::table({"context", "component", "rank", "equals P"}, rows)
      << "\nrestrictions of the components are " << (restriction_equality_holds(s) ? "equalities" : "inclusions only")
      << "\n";
  r.text = out.str();
  return r;
}

}  // namespace toposq
