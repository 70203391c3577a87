#include "printers.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "lyap/config.hpp"
#include "lyap/error.hpp"
#include "lyap/experiments.hpp"

using namespace lyap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lyap_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> dataLines(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

const char* kKingman = R"(
experiment: kingman
seed: 1
cocycle:
  measure:
    atoms: [[2, 0, 0, 0.5]]
    weights: [1]
parameters:
  scales: [1, 10, 100]
  samples: 4
)";

bool configError(const std::function<void()>& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.code() == ErrorCode::Config;
  }
  return false;
}

std::string withOutput(std::string text, const fs::path& dir) { return text + "output: " + dir.string() + "\n"; }

}  // namespace

TEST_CASE("config hash is FNV-1a over the raw text") {
  CHECK(configHash("") == "cbf29ce484222325");
  CHECK(configHash("a") == "af63dc4c8601ec8c");
  CHECK(configHash(kKingman).size() == 16);
  CHECK(configHash("seed: 1") != configHash("seed: 2"));
}

TEST_CASE("configs parse into typed sections") {
  const auto cfg = parseConfig(kKingman);
  CHECK(cfg.experiment == "kingman");
  CHECK(cfg.seed == 1);
  CHECK(cfg.workers == 1);
  REQUIRE(cfg.cocycle);
  CHECK(cfg.cocycle->kind == CocycleSpec::Kind::Measure);
  CHECK(cfg.cocycle->measure->atom(0) == Matrix{{2, 0}, {0, 0.5}});
  CHECK(cfg.hash == configHash(kKingman));
  CHECK_NOTHROW(validateConfig(cfg));
  const auto schr = parseConfig(R"(
experiment: schrodinger-sweep
seed: 2
cocycle:
  schrodinger: {potential: [-1, 1], probabilities: [0.5, 0.5], energies: [0, 1]}
parameters: {n_ref: 16, samples: 4}
)");
  CHECK(schr.cocycle->kind == CocycleSpec::Kind::Schrodinger);
  CHECK(schr.cocycle->energies == std::vector<double>{0.0, 1.0});
  CHECK(schr.cocycle->bernoulli().special());
}

TEST_CASE("malformed configs are rejected with config errors") {
  CHECK(configError([] { parseConfig("experiment: [unclosed"); }));
  CHECK(configError([] { parseConfig("seed: 1"); }));
  CHECK(configError([] { parseConfig("experiment: kingman\nseed: -3"); }));
  CHECK(configError([] { parseConfig("experiment: kingman\nseed: 1\nbogus: 2"); }));
  CHECK(configError([] { parseConfig("experiment: kingman\nseed: x"); }));
  CHECK(configError([] { validateConfig(parseConfig("experiment: nope\nseed: 1")); }));
  CHECK(configError([] {
    parseConfig("experiment: kingman\nseed: 1\ncocycle:\n  measure: {atoms: [[1, 0, 0]], weights: [1]}");
  }));
  CHECK(configError([] {
    parseConfig("experiment: kingman\nseed: 1\ncocycle:\n  measure: {atoms: [[1, 0, 0, 1]], weights: [0.5]}");
  }));
  CHECK(configError([] {
    parseConfig("experiment: kingman\nseed: 1\ncocycle:\n  measure: {atoms: [[1, 0, 0, 1]], weights: [1], metric: l9}");
  }));
  CHECK(configError([] {
    parseConfig("experiment: kingman\nseed: 1\ncocycle:\n  schrodinger: {potential: [0], probabilities: [1]}");
  }));
  // Missing, extra and ill-typed experiment parameters.
  const std::string base = "experiment: kingman\nseed: 1\ncocycle:\n  measure: {atoms: [[2, 0, 0, 0.5]], weights: [1]}\n";
  CHECK(configError([&] { validateConfig(parseConfig(base + "parameters: {samples: 4}")); }));
  CHECK(configError([&] { validateConfig(parseConfig(base + "parameters: {scales: [10, 5], samples: 4}")); }));
  CHECK(configError([&] { validateConfig(parseConfig(base + "parameters: {scales: [5], samples: 4, extra: 1}")); }));
  CHECK(configError([&] { validateConfig(parseConfig(base + "parameters: {scales: [5], samples: many}")); }));
  CHECK(configError([&] { validateConfig(parseConfig(base + "parameters: {scales: [5], samples: 4, blocks: [3]}")); }));
  CHECK(configError([] { validateConfig(parseConfig("experiment: kingman\nseed: 1\nparameters: {scales: [5], samples: 4}")); }));
  CHECK(configError([] {
    validateConfig(parseConfig("experiment: schrodinger-sweep\nseed: 1\ncocycle:\n  schrodinger: {potential: [0], probabilities: [1], energies: [1, 0]}\nparameters: {n_ref: 8, samples: 4}"));
  }));
  CHECK(configError([] { validateConfig(parseConfig("experiment: ap-verify\nseed: 1\nparameters: {epsilon: 0.1}")); }));
}

TEST_CASE("kingman on a constant cocycle writes log 2 at every scale") {
  const auto dir = scratch("kingman");
  const auto res = runExperiment(parseConfig(withOutput(kKingman, dir)));
  CHECK(res.checksPassed);
  const auto text = slurp(dir / "kingman.csv");
  CHECK(text.rfind("# experiment: kingman\n# config_hash: ", 0) == 0);
  CHECK(text.find("# seed: 1\n") != std::string::npos);
  CHECK(text.find(std::string("# version: ") + kVersion) != std::string::npos);
  const auto lines = dataLines(dir / "kingman.csv");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "scale,j,mean,stderr,samples,seed");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    CHECK(std::stod(cells[2]) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(cells[2] == formatReal(std::log(2.0)));
  }
  const auto summary = slurp(dir / "summary.json");
  CHECK(summary.find("\"config_hash\": \"" + configHash(withOutput(kKingman, dir)) + "\"") != std::string::npos);
}

TEST_CASE("ap-verify on an aligned diagonal chain file") {
  const auto dir = scratch("ap");
  fs::create_directories(dir);
  {
    std::ofstream chain(dir / "chain.yaml");
    chain << "chain:\n  - [40, 0, 0, 0.025]\n  - [64, 0, 0, 0.015625]\n  - [50, 0, 0, 0.02]\n";
  }
  const std::string text = "experiment: ap-verify\nseed: 3\nparameters:\n  chain_file: chain.yaml\n  epsilon: 0.3\n  kappa: 0.0009\n";
  auto cfg = parseConfig(withOutput(text, dir / "out"), dir);
  const auto res = runExperiment(cfg);
  CHECK(res.checksPassed);
  const auto lines = dataLines(dir / "out" / "ap_verify.csv");
  REQUIRE(lines.size() == 2);
  const auto cells = split(lines[1]);
  CHECK(cells[9] == "true");
  CHECK(std::stod(cells[10]) <= 1e-10);
  CHECK(configError([&] { loadChainFile(dir / "missing.yaml"); }));
}

TEST_CASE("free-field Schrodinger sweep matches the spectral radius") {
  const auto rows = schrodingerSweep({0.0}, {1.0}, {-3.0, -2.5, 0.0, 2.5, 3.0}, 1024, 16, Rng(901));
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) CHECK(std::abs(r.estimate - freeFieldExponent(r.energy)) <= 3.0 * r.sigma + 1e-15);
  CHECK(freeFieldExponent(3.0) == doctest::Approx(std::log((3.0 + std::sqrt(5.0)) / 2.0)));
  CHECK(freeFieldExponent(1.0) == 0.0);
  CHECK(rows[2].estimate == 0.0);
  CHECK_FALSE(rows[0].localHolder);
  CHECK(rows[1].localHolder);
  CHECK_THROWS_AS(schrodingerSweep({0.0}, {1.0}, {1.0, 0.0}, 16, 4, Rng(1)), LabError);
}

TEST_CASE("outputs are byte-identical across worker counts") {
  const std::string text = R"(
experiment: ldt-fiber
seed: 4
cocycle:
  measure:
    atoms: [[2, 1, 1, 1], [1, 1, 1, 2]]
    weights: [0.5, 0.5]
parameters:
  epsilon: 0.015
  scales: [10, 20, 40]
  samples: 1000
)";
  const auto a = scratch("rep1"), b = scratch("rep4");
  RunOverrides one, four;
  one.workers = 1;
  one.outputDir = a;
  four.workers = 4;
  four.outputDir = b;
  runExperiment(parseConfig(text), one);
  runExperiment(parseConfig(text), four);
  CHECK(slurp(a / "deviation.csv") == slurp(b / "deviation.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  RunOverrides reseed = one;
  reseed.seed = 5;
  reseed.outputDir = scratch("reseed");
  runExperiment(parseConfig(text), reseed);
  CHECK(slurp(*reseed.outputDir / "deviation.csv") != slurp(a / "deviation.csv"));
  CHECK(slurp(*reseed.outputDir / "deviation.csv").find("# seed: 5\n") != std::string::npos);
}

TEST_CASE("unwritable output is an error") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  { std::ofstream(dir / "file") << "x"; }
  RunOverrides ov;
  ov.outputDir = dir / "file" / "sub";
  CHECK(configError([&] { runExperiment(parseConfig(kKingman), ov); }));
}

TEST_CASE("failed checks are data") {
  const std::string text = R"(
experiment: ldt-fiber
seed: 4
cocycle:
  measure:
    atoms: [[2, 1, 1, 1], [1, 1, 1, 2]]
    weights: [0.5, 0.5]
parameters:
  epsilon: 0.5
  scales: [10, 20, 40]
  samples: 200
)";
  RunOverrides ov;
  ov.outputDir = scratch("nohits");
  const auto res = runExperiment(parseConfig(text), ov);
  CHECK_FALSE(res.checksPassed);
  CHECK(slurp(*ov.outputDir / "summary.json").find("\"checks_passed\": false") != std::string::npos);
}

TEST_CASE("formatting uses 17 significant digits") {
  CHECK(formatReal(0.1) == "0.10000000000000001");
  CHECK(formatReal(1.0) == "1");
  CHECK(formatReal(NAN) == "nan");
  CHECK(std::stod(formatReal(M_PI)) == M_PI);
}
