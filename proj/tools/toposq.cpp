// toposq: command-line front end. See README.md for usage.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "toposq/commands.hpp"

namespace {

void add_source(CLI::App* cmd, toposq::Source& src) {
  auto* model = cmd->add_option("--model", src.model_path, "model document written by `build`");
  auto* scenario = cmd->add_option("--scenario", src.scenario_path, "scenario document");
  auto* preset = cmd->add_option("--preset", src.preset, "built-in scenario");
  model->excludes(scenario)->excludes(preset);
  scenario->excludes(preset);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toposq: topos quantum logic at desk scale"};
  app.require_subcommand(1);

  toposq::Source src;
  std::string format = "text";
  std::string out_path, state, prop;
  std::size_t samples = 100;
  std::uint64_t seed = toposq::defaultSeed();

  app.add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));

  auto* build = app.add_subcommand("build", "build the context poset and spectra, optionally save the model");
  build->add_option("scenario", src.scenario_path, "scenario document");
  build->add_option("--preset", src.preset, "built-in scenario");
  build->add_option("--out", out_path, "where to write the model document");

  auto* truth = app.add_subcommand("truth", "sieve-valued truth value of a proposition in a pure state");
  add_source(truth, src);
  truth->add_option("--state", state, "state name")->required();
  truth->add_option("--prop", prop, "proposition name or expression")->required();

  auto* measure = app.add_subcommand("measure", "measure of a proposition in a pure or mixed state");
  add_source(measure, src);
  measure->add_option("--state", state, "state name")->required();
  measure->add_option("--prop", prop, "proposition name or expression")->required();
  measure->add_option("--seed", seed, "seed for the bridge check (default TOPOSQ_SEED or 42)");

  auto* ks = app.add_subcommand("ks", "count global sections of the spectral presheaf");
  add_source(ks, src);

  auto* axioms = app.add_subcommand("axioms", "daseinisation, Heyting and measure property suites");
  add_source(axioms, src);
  axioms->add_option("--samples", samples, "random samples per check");
  axioms->add_option("--seed", seed, "seed (default TOPOSQ_SEED or 42)");

  auto* das = app.add_subcommand("daseinise", "outer daseinisation of an atomic proposition, per context");
  add_source(das, src);
  das->add_option("--prop", prop, "proposition name or `Obs in [a,b]`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  toposq::CommandResult result;
  try {
    if (*build) result = toposq::cmdBuild(src, out_path);
    else if (*truth) result = toposq::cmdTruth(src, state, prop);
    else if (*measure) result = toposq::cmdMeasure(src, state, prop, seed);
    else if (*ks) result = toposq::cmdKs(src);
    else if (*axioms) result = toposq::cmdAxioms(src, samples, seed);
    else if (*das) result = toposq::cmdDaseinise(src, prop);
  } catch (const toposq::Error& err) {
    if (format == "json") {
      std::cout << toposq::Json{{"error", toposq::to_string(err.code())}, {"message", err.what()}}.dump(2) << "\n";
    } else {
      std::cerr << err.what() << "\n";
    }
    return 2;
  }

  if (format == "json") {
    std::cout << result.json.dump(2) << "\n";
  } else {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << result.text << "(" << secs << " s)\n";
  }
  return result.exit_code;
}
