#include <CLI11.hpp>
#include <iostream>

#include "polariton/errors.hpp"
#include "polariton/scenario.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

}  // namespace

int main(int argc, char** argv) {
  using namespace polariton;
  CLI::App app{"Cavity-dressed wave-packet dynamics runner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kEngineVersion);

  std::string config, output_dir, mode;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "scenario file (INI)")->required();
    sub->add_option("--output-dir", output_dir, "directory for the output files");
    sub->add_option("--mode", mode, "coupling mode")->check(CLI::IsMember({"simplified", "full"}));
    sub->add_option("--seed", seed, "seed of the lifetime-fit multi-start");
  };
  CLI::App* run = app.add_subcommand("run", "run a scenario and write all outputs");
  CLI::App* validate = app.add_subcommand("validate", "check a scenario without running it");
  CLI::App* surfaces = app.add_subcommand("surfaces", "write dressed surfaces and couplings only");
  for (CLI::App* s : {run, validate, surfaces}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  ConfigOverrides ov;
  CLI::App* active = app.get_subcommands().front();
  if (active->count("--output-dir")) ov.output_dir = output_dir;
  if (active->count("--mode")) ov.mode = parse_coupling_mode(mode);
  if (active->count("--seed")) ov.seed = seed;

  ScenarioConfig cfg;
  try {
    cfg = load_config(config, ov);
    const ValidationReport rep = validate_config(cfg);
    if (active == validate) {
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << config << ": ok (" << to_string(cfg.kind) << ", hash " << metadata_hash(cfg)
                << ")\n";
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }

  try {
    const RunSummary sum = run_scenario(cfg, active == surfaces, &std::cerr);
    for (const auto& f : sum.files) std::cout << f.string() << "\n";
    return kOk;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
