// lyaplab: runs, validates and calibrates Lyapunov exponent experiments.
// Exit 0 on success (including failed mathematical checks), 1 on
// infrastructure errors, 2 on usage errors.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lyap/avalanche.hpp"
#include "lyap/config.hpp"
#include "lyap/error.hpp"
#include "lyap/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for Lyapunov exponents of Bernoulli linear cocycles"};
  app.set_version_flag("--version", std::string(lyap::kVersion));
  app.require_subcommand(1);

  std::string configPath;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", configPath, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Check a config against its experiment schema");
  validate->add_option("config", configPath, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);

  std::size_t chains = 10000;
  std::uint64_t calSeed = lyap::kApCalibrationSeed;
  double safety = lyap::kApCalibrationSafety;
  auto* calibrate = app.add_subcommand("calibrate-ap", "Recompute the Avalanche Principle constant on the seeded corpus");
  calibrate->add_option("--chains", chains, "Corpus size")->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", calSeed, "Corpus seed");
  calibrate->add_option("--safety", safety, "Safety factor")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List experiment names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& n : lyap::experimentNames()) std::cout << n << "\n";
      return 0;
    }
    if (*calibrate) {
      const auto cal = lyap::calibrateApConstant(chains, calSeed, safety);
      std::printf("chains %zu\nmax_ratio %.17g\ncap_c %.17g\n", cal.chains, cal.maxRatio, cal.capC);
      return 0;
    }
    const auto cfg = lyap::loadConfig(configPath);
    if (*validate) {
      lyap::validateConfig(cfg);
      std::cout << "ok " << cfg.experiment << " " << cfg.hash << "\n";
      return 0;
    }
    lyap::RunOverrides ov;
    ov.seed = seed;
    ov.workers = workers;
    if (out) ov.outputDir = *out;
    const auto res = lyap::runExperiment(cfg, ov);
    for (const auto& f : res.files) std::cout << f.string() << "\n";
    std::cout << "checks_passed " << (res.checksPassed ? "true" : "false") << "\n";
    return 0;
  } catch (const lyap::LabError& e) {
    std::cerr << "lyaplab: " << lyap::toString(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lyaplab: " << e.what() << "\n";
    return 1;
  }
}
