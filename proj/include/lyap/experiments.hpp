#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyap/config.hpp"
#include "lyap/rng.hpp"

namespace lyap {

extern const char* const kVersion;

const std::vector<std::string>& experimentNames();

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::filesystem::path> outputDir;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  bool checksPassed = true;  // a failed check is data, never an error
  nlohmann::ordered_json summary;
};

/// Parses the experiment-specific parameters without running anything.
void validateConfig(const ExperimentConfig& config);
RunResult runExperiment(ExperimentConfig config, const RunOverrides& overrides = {});

/// Fixed 17-significant-digit rendering used by every CSV.
std::string formatReal(double x);

struct SchrodingerSweepRow {
  double energy = 0.0;
  double estimate = 0.0;   // L1^(nRef)
  double stdError = 0.0;
  /// Finite-scale systematic term: with a(m) the sample mean of
  /// log |A^(m)|, max over m <= nRef of |a(m) - (m / nRef) a(nRef)| / nRef.
  /// An offset a(m) = mL + c gives c / nRef; a bounded elliptic orbit gives
  /// at least the oscillation it leaves in a(nRef) / nRef.
  double bias = 0.0;
  double sigma = 0.0;  // hypot(stdError, bias)
  std::optional<double> localHolder;
};

/// Energies must be sorted. The local Holder exponent at an interior grid
/// point comes from the triple (E_{i-1}, E_i, E_{i+1}) as the slope of
/// log|L(E_j) - L(E_{i-1})| against log|E_j - E_{i-1}| for j = i, i+1.
std::vector<SchrodingerSweepRow> schrodingerSweep(const std::vector<double>& potential, const std::vector<double>& probabilities,
                                                  const std::vector<double>& energies, std::size_t nRef, std::size_t samples, const Rng& stream,
                                                  unsigned workers = 1);

/// log |E/2 + sqrt(E^2/4 - 1)| for |E| > 2 and 0 otherwise.
double freeFieldExponent(double energy);

}  // namespace lyap
