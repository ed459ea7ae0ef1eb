#pragma once

// Built models: a validated scenario together with its closed context poset
// and spectral presheaf, and their JSON persistence.
//
// The saved document carries the scenario source, every context with its atom
// matrices, the strict order pairs, the spectra with their restriction maps,
// and metadata {schema_version, checksum}. The checksum is FNV-1a 64 over the
// compact dump of the document with the checksum field removed. On load the
// poset is rebuilt from the stored atoms and compared with the stored order
// and spectra, so a document that parses but lies about its structure is
// rejected as well.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "toposq/scenario.hpp"

namespace toposq {

struct Model {
  Scenario scenario;
  PresheafPtr sigma;
};

inline Model buildModel(Scenario sc) {
  auto sigma = buildPresheaf(sc);
  return {std::move(sc), std::move(sigma)};
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline Json tolerances_json(const Tolerances& t) { return {{"num", t.num}, {"cluster", t.cluster}, {"meas", t.meas}}; }

// Order pairs and spectra, the parts recomputed and compared on load.
inline Json order_json(const ContextPoset& poset) {
  Json order = Json::array();
  for (auto [lower, upper] : poset.arrows()) order.push_back({poset.context(lower).id(), poset.context(upper).id()});
  return order;
}

inline Json spectra_json(const SpectralPresheaf& sigma) {
  const auto& poset = sigma.poset();
  Json spectra = Json::array();
  for (std::size_t v = 0; v < sigma.size(); ++v) {
    Json restrictions = Json::array();
    for (std::size_t w : poset.down_set(v)) {
      if (w == v) continue;
      restrictions.push_back({{"to", poset.context(w).id()}, {"map", poset.atom_map(w, v)}});
    }
    spectra.push_back(
        {{"context", poset.context(v).id()}, {"characters", sigma.spectrum_size(v)}, {"restrictions", restrictions}});
  }
  return spectra;
}

inline std::string checksum_of(Json doc) {
  doc["metadata"].erase("checksum");
  return hex64(fnv1a64(doc.dump()));
}

}  // namespace detail

inline Json modelJson(const Model& m) {
  const auto& sigma = *m.sigma;
  Json doc;
  doc["metadata"] = {{"schema_version", kSchemaVersion}, {"kind", "toposq-model"}};
  doc["scenario"] = m.scenario.document;
  doc["dim"] = sigma.poset().dim();
  doc["tolerances"] = detail::tolerances_json(sigma.tolerances());
  Json contexts = Json::array();
  for (const auto& ctx : sigma.poset().contexts()) {
    Json atoms = Json::array();
    for (const auto& a : ctx.atoms()) atoms.push_back(matrix_json(a.matrix()));
    contexts.push_back({{"id", ctx.id()}, {"atoms", atoms}});
  }
  doc["contexts"] = contexts;
  doc["order"] = detail::order_json(sigma.poset());
  doc["spectra"] = detail::spectra_json(sigma);
  doc["metadata"]["checksum"] = detail::checksum_of(doc);
  return doc;
}

inline std::string saveModel(const Model& m) { return modelJson(m).dump(1) + "\n"; }

inline Model loadModel(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& err) {
    // Models are machine-written; unreadable text means a damaged file.
    throw Error(ErrorCode::IntegrityError, std::string("model document is not valid JSON (") + err.what() + ")");
  }
  try {
    const Json& meta = detail::field(doc, "metadata", "$");
    const Json& version = detail::field(meta, "schema_version", "$.metadata");
    if (version != kSchemaVersion) {
      throw Error(ErrorCode::SchemaVersionError, "unsupported model schema_version " + version.dump());
    }
    const std::string stored = detail::string_field(meta, "checksum", "$.metadata");
    if (stored != detail::checksum_of(doc)) throw Error(ErrorCode::IntegrityError, "checksum mismatch");

    Scenario sc = scenarioFromJson(detail::field(doc, "scenario", "$"));
    const std::size_t dim = sc.dim;
    std::vector<Context> contexts;
    const Json& cs = detail::array(detail::field(doc, "contexts", "$"), "$.contexts");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = "$.contexts[" + std::to_string(i) + "]";
      std::vector<Projection> atoms;
      const Json& as = detail::array(detail::field(cs[i], "atoms", p), p + ".atoms");
      for (std::size_t k = 0; k < as.size(); ++k) {
        atoms.push_back(Projection::from(detail::matrix(as[k], dim, p + ".atoms[" + std::to_string(k) + "]"),
                                         sc.tolerances));
      }
      contexts.push_back(Context::from_atoms(detail::string_field(cs[i], "id", p), std::move(atoms), sc.tolerances));
    }
    auto sigma = make_presheaf(buildPoset(std::move(contexts), Closure::none, sc.tolerances));

    const auto& poset = sigma->poset();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (poset.context(i).id() != cs[i]["id"]) throw Error(ErrorCode::IntegrityError, "context order differs");
    }
    if (detail::order_json(poset) != detail::field(doc, "order", "$")) {
      throw Error(ErrorCode::IntegrityError, "stored order relation does not match the contexts");
    }
    if (detail::spectra_json(*sigma) != detail::field(doc, "spectra", "$")) {
      throw Error(ErrorCode::IntegrityError, "stored spectra do not match the contexts");
    }
    return {std::move(sc), std::move(sigma)};
  } catch (const ValidationError& err) {
    throw Error(ErrorCode::ParseError, err.what());
  }
}

}  // namespace toposq
