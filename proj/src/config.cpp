#include "lyap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace lyap {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw LabError(ErrorCode::Config, msg); }

std::string readFile(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

YAML::Node parseYaml(const std::string& text, const std::string& where) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(where + ": malformed config: " + e.what());
  }
}

std::vector<double> numberList(const YAML::Node& node, const std::string& where) {
  if (!node || !node.IsSequence()) fail(where + ": expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : node) {
    try {
      out.push_back(x.as<double>());
    } catch (const YAML::Exception&) {
      fail(where + ": expected a list of numbers");
    }
  }
  return out;
}

CocycleSpec parseCocycle(const YAML::Node& node) {
  ParamReader r(node, "cocycle");
  CocycleSpec spec;
  const bool hasMeasure = r.has("measure"), hasSchr = r.has("schrodinger");
  if (hasMeasure == hasSchr) fail("cocycle: give exactly one of 'measure' and 'schrodinger'");
  if (hasMeasure) {
    spec.kind = CocycleSpec::Kind::Measure;
    spec.measure = parseMeasure(r.node("measure"), "cocycle.measure");
    spec.special = r.get<bool>("special", false);
  } else {
    spec.kind = CocycleSpec::Kind::Schrodinger;
    ParamReader s(r.node("schrodinger"), "cocycle.schrodinger");
    spec.potential = numberList(s.node("potential"), "cocycle.schrodinger.potential");
    spec.probabilities = numberList(s.node("probabilities"), "cocycle.schrodinger.probabilities");
    if (s.has("energy") == s.has("energies")) fail("cocycle.schrodinger: give exactly one of 'energy' and 'energies'");
    if (s.has("energy"))
      spec.energies = {s.get<double>("energy")};
    else
      spec.energies = numberList(s.node("energies"), "cocycle.schrodinger.energies");
    if (spec.energies.empty()) fail("cocycle.schrodinger: empty energy grid");
    s.finish();
    // Validates the potential once, here.
    try {
      (void)SchrodingerCocycle(spec.potential, spec.probabilities, spec.energies.front());
    } catch (const LabError& e) {
      fail(std::string("cocycle.schrodinger: ") + e.what());
    }
  }
  r.finish();
  return spec;
}

}  // namespace

std::string configHash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

ParamReader::ParamReader(YAML::Node node, std::string section) : node_(std::move(node)), section_(std::move(section)) {
  if (!node_ || node_.IsNull()) {
    node_ = YAML::Node(YAML::NodeType::Map);
  } else if (!node_.IsMap()) {
    fail(section_ + ": expected a mapping");
  }
}

bool ParamReader::has(const std::string& key) const { return static_cast<bool>(node_[key]); }

YAML::Node ParamReader::node(const std::string& key) {
  if (!has(key)) fail(section_ + ": missing key '" + key + "'");
  seen_.insert(key);
  return node_[key];
}

void ParamReader::finish() const {
  for (const auto& kv : node_) {
    const auto key = kv.first.as<std::string>();
    if (!seen_.count(key)) fail(section_ + ": unknown key '" + key + "'");
  }
}

Matrix parseMatrix(const YAML::Node& node, const std::string& where) {
  const auto v = numberList(node, where);
  const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
  if (d < 1 || static_cast<std::size_t>(d) * static_cast<std::size_t>(d) != v.size()) fail(where + ": matrix entry count is not a square");
  try {
    return Matrix(d, v);
  } catch (const LabError& e) {
    fail(where + ": " + e.what());
  }
}

AtomicMeasure parseMeasure(const YAML::Node& node, const std::string& where) {
  ParamReader r(node, where);
  const auto atomsNode = r.node("atoms");
  if (!atomsNode.IsSequence() || atomsNode.size() == 0) fail(where + ".atoms: expected a non-empty list of matrices");
  std::vector<Matrix> atoms;
  for (std::size_t i = 0; i < atomsNode.size(); ++i) atoms.push_back(parseMatrix(atomsNode[i], where + ".atoms[" + std::to_string(i) + "]"));
  const auto weights = numberList(r.node("weights"), where + ".weights");
  GroundMetric metric = GroundMetric::Operator;
  if (r.has("metric")) {
    try {
      metric = parseGroundMetric(r.get<std::string>("metric"));
    } catch (const LabError& e) {
      fail(where + ".metric: " + e.what());
    }
  }
  r.finish();
  try {
    return AtomicMeasure(std::move(atoms), weights, metric);
  } catch (const LabError& e) {
    fail(where + ": " + e.what());
  }
}

BernoulliCocycle CocycleSpec::bernoulli() const {
  if (kind == Kind::Measure) return BernoulliCocycle(*measure, special);
  return schrodingerAsBernoulli(schrodinger(energies.front()));
}

SchrodingerCocycle CocycleSpec::schrodinger(double energy) const {
  if (kind != Kind::Schrodinger) fail("cocycle: expected a schrodinger cocycle");
  return SchrodingerCocycle(potential, probabilities, energy);
}

ExperimentConfig parseConfig(const std::string& text, const std::filesystem::path& baseDir) {
  const YAML::Node root = parseYaml(text, "config");
  ParamReader r(root, "config");
  ExperimentConfig cfg;
  cfg.hash = configHash(text);
  cfg.baseDir = baseDir;
  cfg.experiment = r.get<std::string>("experiment");
  const auto seed = r.get<long long>("seed");
  if (seed < 0) fail("config: seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const auto workers = r.get<int>("workers", 1);
  if (workers < 1) fail("config: workers must be at least 1");
  cfg.workers = static_cast<unsigned>(workers);
  if (r.has("output")) cfg.outputDir = r.get<std::string>("output");
  if (r.has("cocycle")) cfg.cocycle = parseCocycle(r.node("cocycle"));
  cfg.parameters = r.has("parameters") ? r.node("parameters") : YAML::Node(YAML::NodeType::Map);
  r.finish();
  return cfg;
}

ExperimentConfig loadConfig(const std::filesystem::path& file) { return parseConfig(readFile(file), file.parent_path()); }

std::vector<Matrix> loadChainFile(const std::filesystem::path& file) {
  const YAML::Node root = parseYaml(readFile(file), file.string());
  ParamReader r(root, file.string());
  const auto chain = r.node("chain");
  r.finish();
  if (!chain.IsSequence() || chain.size() < 2) fail(file.string() + ": a chain needs at least two matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < chain.size(); ++i) out.push_back(parseMatrix(chain[i], file.string() + ": chain[" + std::to_string(i) + "]"));
  for (const auto& m : out)
    if (m.dim() != out.front().dim()) fail(file.string() + ": chain matrices differ in dimension");
  return out;
}

}  // namespace lyap
