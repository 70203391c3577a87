#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "lyap/cocycle.hpp"
#include "lyap/error.hpp"
#include "lyap/measure.hpp"

namespace lyap {

/// 16 lowercase hex digits of FNV-1a/64 over the raw config text.
std::string configHash(std::string_view text);

/// Reads one mapping and rejects keys nobody asked for.
class ParamReader {
 public:
  ParamReader(YAML::Node node, std::string section);

  bool has(const std::string& key) const;
  YAML::Node node(const std::string& key);

  template <class T>
  T get(const std::string& key) {
    if (!has(key)) throw LabError(ErrorCode::Config, section_ + ": missing key '" + key + "'");
    return convert<T>(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? convert<T>(key) : fallback;
  }

  /// Throws on every key that was never read.
  void finish() const;
  const std::string& section() const noexcept { return section_; }

 private:
  template <class T>
  T convert(const std::string& key) {
    seen_.insert(key);
    try {
      return node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw LabError(ErrorCode::Config, section_ + ": key '" + key + "' has the wrong type");
    }
  }

  YAML::Node node_;
  std::string section_;
  std::set<std::string> seen_;
};

/// Row-major number list of length d^2.
Matrix parseMatrix(const YAML::Node& node, const std::string& where);
/// {atoms: [row-major matrices], weights: [reals], metric: operator|frobenius}
AtomicMeasure parseMeasure(const YAML::Node& node, const std::string& where);

struct CocycleSpec {
  enum class Kind { Measure, Schrodinger };
  Kind kind = Kind::Measure;
  std::optional<AtomicMeasure> measure;
  bool special = false;
  std::vector<double> potential;
  std::vector<double> probabilities;
  std::vector<double> energies;  // one entry for a single energy

  /// The measure form; a Schrodinger spec uses its first energy.
  BernoulliCocycle bernoulli() const;
  SchrodingerCocycle schrodinger(double energy) const;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::filesystem::path outputDir = "out";
  std::filesystem::path baseDir = ".";  // relative paths in the config resolve here
  std::string hash;
  std::optional<CocycleSpec> cocycle;
  YAML::Node parameters;
};

ExperimentConfig parseConfig(const std::string& text, const std::filesystem::path& baseDir = ".");
ExperimentConfig loadConfig(const std::filesystem::path& file);

/// Chain file: {chain: [row-major matrices]}.
std::vector<Matrix> loadChainFile(const std::filesystem::path& file);

}  // namespace lyap
