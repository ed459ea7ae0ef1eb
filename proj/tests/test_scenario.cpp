#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "toposq/commands.hpp"

namespace toposq {
namespace {

using namespace toposq::test;

const char* kMinimal = R"({
  "schema_version": 1,
  "dim": 2,
  "observables": [{"name": "Sz", "matrix": [[1, 0], [0, -1]]}],
  "contexts": [{"id": "V_z", "generators": ["Sz"]}],
  "propositions": [{"name": "up", "observable": "Sz", "intervals": [[1, 1]]}],
  "states": [{"name": "zero", "vector": [1, 0]}, {"name": "mixed", "density": [[0.5, 0], [0, 0.5]]}]
})";

Json minimal() { return Json::parse(kMinimal); }

template <class F>
std::string validation_path(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<no error>";
}

template <class F>
ErrorCode error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ValidationError;
}

TEST(Scenario, LoadsMinimalDocument) {
  const auto sc = loadScenario(kMinimal);
  EXPECT_EQ(sc.dim, 2u);
  ASSERT_EQ(sc.contexts.size(), 1u);
  EXPECT_EQ(sc.contexts[0].generators.size(), 2u);
  EXPECT_TRUE(sc.state("zero").is_pure());
  EXPECT_FALSE(sc.state("mixed").is_pure());
  EXPECT_TRUE(approx_equal(sc.projection_of(sc.proposition("up")), p0()));
  EXPECT_EQ(buildPresheaf(sc)->size(), 1u);
}

TEST(Scenario, ComplexEntriesAndProjectionGenerators) {
  Json doc = minimal();
  doc["observables"].push_back({{"name", "Sy"}, {"matrix", {{0, {0, -1}}, {{0, 1}, 0}}}});
  doc["contexts"].push_back({{"id", "V_y"}, {"generators", {"Sy"}}});
  doc["contexts"].push_back({{"id", "V_x"}, {"generators", {{{"projection", {{0.5, 0.5}, {0.5, 0.5}}}}}}});
  const auto sc = scenarioFromJson(doc);
  EXPECT_EQ(buildPresheaf(sc)->size(), 3u);
}

TEST(Scenario, ValidationErrorsCarryThePath) {
  Json doc = minimal();
  doc["observables"][0]["matrix"] = {{1, 1}, {0, -1}};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.observables[0].matrix");

  doc = minimal();
  doc["contexts"][0]["generators"] = {"Sx"};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.contexts[0].generators[0]");

  doc = minimal();
  doc["propositions"][0]["observable"] = "Sx";
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.propositions[0].observable");

  doc = minimal();
  doc["propositions"][0]["intervals"] = {{2, 1}};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.propositions[0].intervals[0]");

  doc = minimal();
  doc["states"][0]["vector"] = {1, 1};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.states[0].vector");

  doc = minimal();
  doc["states"][0]["density"] = {{1, 0}, {0, 0}};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.states[0]");

  doc = minimal();
  doc["states"][0]["name"] = "up";
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.states[0].name");

  doc = minimal();
  doc["dim"] = 1;
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.dim");

  doc = minimal();
  doc.erase("contexts");
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.contexts");

  doc = minimal();
  doc["closure"] = "everything";
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.closure");
}

TEST(Scenario, NonCommutingGeneratorsAreRejected) {
  Json doc = minimal();
  doc["observables"].push_back({{"name", "Sx"}, {"matrix", {{0, 1}, {1, 0}}}});
  doc["contexts"][0]["generators"] = {"Sz", "Sx"};
  EXPECT_EQ(validation_path([&] { scenarioFromJson(doc); }), "$.contexts[0].generators");
}

TEST(Scenario, SchemaAndSyntaxErrors) {
  Json doc = minimal();
  doc["schema_version"] = 2;
  EXPECT_EQ(error_code([&] { scenarioFromJson(doc); }), ErrorCode::SchemaVersionError);
  EXPECT_EQ(error_code([] { loadScenario("{\"schema_version\": 1,"); }), ErrorCode::ParseError);
}

TEST(Scenario, UnknownNames) {
  const auto sc = loadScenario(kMinimal);
  EXPECT_EQ(error_code([&] { sc.state("plus"); }), ErrorCode::UnknownState);
  EXPECT_EQ(error_code([&] { sc.proposition("down"); }), ErrorCode::UnknownProposition);
  EXPECT_EQ(error_code([] { preset("qubit-zy"); }), ErrorCode::UnknownPreset);
}

TEST(Presets, Shapes) {
  for (const auto& name : presetNames()) EXPECT_NO_THROW(buildPresheaf(preset(name))) << name;
  EXPECT_EQ(preset("qubit-zx").dim, 2u);
  EXPECT_EQ(buildPresheaf(preset("qubit-zx"))->size(), 2u);
  EXPECT_EQ(buildPresheaf(preset("qubit-xyz"))->size(), 3u);
  EXPECT_EQ(buildPresheaf(preset("qutrit-chain"))->size(), 4u);
  EXPECT_EQ(buildPresheaf(preset("qutrit-mub"))->size(), 16u);
  EXPECT_EQ(preset("mermin-square").contexts.size(), 6u);
  EXPECT_EQ(buildPresheaf(preset("mermin-square"))->size(), 75u);
  EXPECT_TRUE(preset("ks-demo").report.value("show_contexts", false));
}

TEST(Presets, PropositionsMatchFixtures) {
  const auto sc = preset("qubit-zx");
  EXPECT_TRUE(approx_equal(sc.projection_of(sc.proposition("SzUp")), p0()));
  EXPECT_TRUE(approx_equal(sc.projection_of(sc.proposition("SxUp")), p_plus()));
  const auto chain = preset("qutrit-chain");
  EXPECT_TRUE(approx_equal(chain.projection_of(chain.proposition("E1")), e(0)));
  EXPECT_EQ(chain.projection_of(chain.proposition("E23")).rank(), 2u);
}

TEST(Model, RoundTripPreservesStructure) {
  for (const char* name : {"qutrit-chain", "mermin-square"}) {
    const auto m = buildModel(preset(name));
    const auto text = saveModel(m);
    const auto back = loadModel(text);
    const auto& a = m.sigma->poset();
    const auto& b = back.sigma->poset();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t v = 0; v < a.size(); ++v) EXPECT_EQ(a.context(v).id(), b.context(v).id());
    EXPECT_EQ(a.arrows(), b.arrows());
    EXPECT_EQ(countGlobalSections(*m.sigma), countGlobalSections(*back.sigma));
    EXPECT_EQ(saveModel(back), text);
  }
}

TEST(Model, SavedDocumentIsDeterministic) {
  EXPECT_EQ(saveModel(buildModel(preset("qutrit-mub"))), saveModel(buildModel(preset("qutrit-mub"))));
}

TEST(Model, DamagedDocumentsAreRejected) {
  const auto text = saveModel(buildModel(preset("qubit-zx")));
  EXPECT_EQ(error_code([&] { loadModel(text.substr(0, text.size() / 2)); }), ErrorCode::IntegrityError);

  Json doc = Json::parse(text);
  doc["dim"] = 3;
  EXPECT_EQ(error_code([&] { loadModel(doc.dump()); }), ErrorCode::IntegrityError);

  doc = Json::parse(text);
  doc["metadata"]["schema_version"] = 7;
  EXPECT_EQ(error_code([&] { loadModel(doc.dump()); }), ErrorCode::SchemaVersionError);

  // Consistent checksum but a stored order that the contexts do not produce.
  doc = Json::parse(text);
  doc["order"].push_back({"V_z", "V_x"});
  doc["metadata"]["checksum"] = detail::checksum_of(doc);
  EXPECT_EQ(error_code([&] { loadModel(doc.dump()); }), ErrorCode::IntegrityError);

  doc = Json::parse(text);
  doc.erase("contexts");
  doc["metadata"]["checksum"] = detail::checksum_of(doc);
  EXPECT_EQ(error_code([&] { loadModel(doc.dump()); }), ErrorCode::ParseError);
}

TEST(Proposition, Precedence) {
  EXPECT_EQ(parseProposition("a | b & !c")->to_string(), "a ∨ (b ∧ ¬c)");
  EXPECT_EQ(parseProposition("a -> b -> c")->to_string(), "a ⇒ (b ⇒ c)");
  EXPECT_EQ(parseProposition("(a or b) and not c")->to_string(), "(a ∨ b) ∧ ¬c");
  EXPECT_EQ(parseProposition("¬¬a ∧ b")->to_string(), "¬¬a ∧ b");
  EXPECT_EQ(parseProposition("orbit and android")->to_string(), "orbit ∧ android");
}

TEST(Proposition, RangesAndErrors) {
  const auto e1 = parseProposition("Sz in [-1,-1], [1, 1]");
  EXPECT_TRUE(e1->is_range);
  EXPECT_EQ(e1->intervals.size(), 2u);
  const auto e2 = parseProposition("A in [1.5,3.5] & E1");
  EXPECT_EQ(e2->kind, PropExpr::Kind::conjunction);
  for (const char* bad : {"", "a &", "(a", "a in [2,1]", "a in 3", "a b"}) {
    EXPECT_EQ(error_code([&] { parseProposition(bad); }), ErrorCode::ParseError) << bad;
  }
}

TEST(Proposition, EvaluatesInTheHeytingAlgebra) {
  const auto sc = preset("qubit-zx");
  const auto sigma = buildPresheaf(sc);
  const auto up = daseinise(p0(), sigma);
  const auto plus_ = daseinise(p_plus(), sigma);
  EXPECT_EQ(evaluateProposition(*parseProposition("SzUp"), sc, sigma), up);
  EXPECT_EQ(evaluateProposition(*parseProposition("Sz in [1,1]"), sc, sigma), up);
  EXPECT_EQ(evaluateProposition(*parseProposition("SzUp & SxUp"), sc, sigma), meet(up, plus_));
  EXPECT_EQ(evaluateProposition(*parseProposition("SzUp | SxUp"), sc, sigma), join(up, plus_));
  EXPECT_EQ(evaluateProposition(*parseProposition("SzUp => SxUp"), sc, sigma), implies(up, plus_));
  EXPECT_EQ(evaluateProposition(*parseProposition("!SzUp"), sc, sigma), negate(up));
  EXPECT_EQ(error_code([&] { evaluateProposition(*parseProposition("Nope"), sc, sigma); }),
            ErrorCode::UnknownProposition);
  EXPECT_EQ(error_code([&] { atomProjection(*parseProposition("!SzUp"), sc); }), ErrorCode::UnknownProposition);
}

Source preset_source(const std::string& name) {
  Source s;
  s.preset = name;
  return s;
}

TEST(Commands, Build) {
  const auto path = (std::filesystem::temp_directory_path() / "toposq_test_model.json").string();
  const auto r = cmdBuild(preset_source("qutrit-chain"), path);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.json["results"]["contexts"], 4);
  EXPECT_EQ(r.json["results"]["arrows"], 3);
  Source from_model;
  from_model.model_path = path;
  EXPECT_EQ(cmdKs(from_model).json["results"]["global_sections"], 3);
  std::remove(path.c_str());
}

TEST(Commands, SourceMustBeUnique) {
  Source both = preset_source("qubit-zx");
  both.scenario_path = "x.json";
  EXPECT_EQ(error_code([&] { cmdKs(both); }), ErrorCode::ParseError);
  EXPECT_EQ(error_code([] { cmdKs(Source{}); }), ErrorCode::ParseError);
  Source missing;
  missing.scenario_path = "/nonexistent/scenario.json";
  EXPECT_EQ(error_code([&] { cmdKs(missing); }), ErrorCode::ParseError);
}

TEST(Commands, ScenarioFile) {
  const auto path = (std::filesystem::temp_directory_path() / "toposq_test_scenario.json").string();
  std::ofstream(path) << kMinimal;
  Source src;
  src.scenario_path = path;
  const auto r = cmdTruth(src, "zero", "up");
  EXPECT_EQ(r.json["results"]["verdict"], "totally true");
  std::remove(path.c_str());
}

TEST(Commands, Truth) {
  const auto src = preset_source("qubit-zx");
  EXPECT_EQ(cmdTruth(preset_source("qutrit-chain"), "e1", "E1").json["results"]["verdict"], "totally true");
  const auto partial = cmdTruth(src, "zero", "Sx in [1,1]");
  EXPECT_EQ(partial.json["results"]["verdict"], "partially true");
  for (const auto& row : partial.json["results"]["per_context"]) {
    EXPECT_EQ(row["local"], row["context"] == "V_z") << row["context"];
  }
  const auto none = cmdTruth(src, "plus", "SzUp & SxUp");
  EXPECT_EQ(none.json["results"]["totally_true_subspace_rank"], 0);
  EXPECT_NE(none.text.find("no state makes"), std::string::npos);
  EXPECT_EQ(error_code([&] { cmdTruth(src, "mixed", "SzUp"); }), ErrorCode::NotPure);
  EXPECT_EQ(error_code([&] { cmdTruth(src, "nobody", "SzUp"); }), ErrorCode::UnknownState);
}

TEST(Commands, Measure) {
  const auto r = cmdMeasure(preset_source("qubit-zx"), "mixed", "SzUp", 42);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NEAR(r.json["results"]["values"]["V_z"].get<double>(), 0.5, 1e-9);
  EXPECT_NEAR(r.json["results"]["values"]["V_x"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(r.json["results"]["bridge"]["consistent"], true);
  EXPECT_EQ(cmdMeasure(preset_source("mermin-square"), "bell", "ZZUp | XXUp", 1).exit_code, 0);
}

TEST(Commands, Ks) {
  EXPECT_EQ(cmdKs(preset_source("qubit-zx")).json["results"]["global_sections"], 4);
  EXPECT_EQ(cmdKs(preset_source("qutrit-chain")).json["results"]["global_sections"], 3);
  const auto ks = cmdKs(preset_source("ks-demo"));
  EXPECT_EQ(ks.json["results"]["global_sections"], 0);
  EXPECT_EQ(ks.json["results"]["contexts"].size(), 75u);
  EXPECT_FALSE(ks.json["results"].contains("least_section"));
}

TEST(Commands, Daseinise) {
  const auto r = cmdDaseinise(preset_source("qutrit-chain"), "E1");
  const auto& per = r.json["results"]["per_context"];
  ASSERT_EQ(per.size(), 4u);
  EXPECT_EQ(per[0]["equals_P"], true);
  EXPECT_EQ(per[0]["rank"], 1);
  EXPECT_EQ(error_code([] { cmdDaseinise(preset_source("qutrit-chain"), "E1 | E2"); }),
            ErrorCode::UnknownProposition);
}

TEST(Commands, AxiomsReportIsReproducible) {
  const auto a = cmdAxioms(preset_source("qutrit-chain"), 20, 5);
  const auto b = cmdAxioms(preset_source("qutrit-chain"), 20, 5);
  EXPECT_EQ(a.json.dump(), b.json.dump());
  EXPECT_EQ(a.json["seed"], 5);
  EXPECT_EQ(a.exit_code, a.json["failed"] == 0 ? 0 : 1);
}

}  // namespace
}  // namespace toposq
