#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// Default c in the admissibility gate varkappa <= c * epsilon^2.
inline constexpr double kDefaultGateC = 0.01;

/// Constant C in |AP residual| <= C * n * varkappa / epsilon^2, calibrated on
/// the 10^4-chain corpus of calibrateApConstant(10000, kApCalibrationSeed)
/// and frozen. Regenerate with `lyaplab calibrate-ap`.
inline constexpr double kFrozenApConstant = 0.027;
inline constexpr std::uint64_t kApCalibrationSeed = 20240611;
/// Safety factor applied to the largest observed ratio during calibration.
inline constexpr double kApCalibrationSafety = 1.5;

/// C2 of the inductive step: the AP constant times a safety factor of 4.
inline constexpr double kInductiveConstant = 4.0 * kFrozenApConstant;

/// One chain element with its log |wedge_2 g| tracked separately, so that
/// the gap ratio of long blocks is read in log space instead of from the
/// cancelling minors of a nearly rank-one matrix.
struct ChainLink {
  ScaledMatrix block;
  double logWedge2 = 0.0;

  double logNorm() const { return block.logNorm(); }
  double logGapRatio() const { return 2.0 * logNorm() - logWedge2; }
};

ChainLink makeLink(const Matrix& g);

struct APReport {
  std::size_t chainLength = 0;
  double minGapRatio = 1.0;
  double logMinGapRatio = 0.0;
  double minAngleRatio = 1.0;
  double epsilon = 0.0;
  double varkappa = 0.0;
  double capC = 0.0;
  double gateC = kDefaultGateC;
  bool gapsMet = false;
  bool anglesMet = false;
  bool admissible = false;  // varkappa <= gateC * epsilon^2
  bool hypothesesMet = false;
  double residual = 0.0;
  double bound = 0.0;
};

/// Checks the gap and angle hypotheses of the Avalanche Principle on a chain
/// g_0, ..., g_{n-1} and measures, independently of them, the residual
///   | log|g^(n)| + sum_{i=1}^{n-2} log|g_i| - sum_{i=1}^{n-1} log|g_i g_{i-1}| |.
APReport verifyChain(std::span<const ChainLink> chain, double epsilon, double varkappa, double capC = kFrozenApConstant, double gateC = kDefaultGateC);
APReport verifyChain(std::span<const Matrix> chain, double epsilon, double varkappa, double capC = kFrozenApConstant, double gateC = kDefaultGateC);

/// Blocks g_i = A^(n0)(T^{i n0} x) of a trajectory, floor(len / n0) of them.
std::vector<ChainLink> blockChain(const BernoulliCocycle& c, const Trajectory& t, std::size_t n0);

struct IdentityEstimate {
  double value = 0.0;       // |mean|
  double signedMean = 0.0;  // mean of L1^(n1) + L1^(n0) - 2 L1^(2 n0)
  double stdError = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo |L1^(n1) + L1^(n0) - 2 L1^(2 n0)|, the three scales read off
/// prefixes of the same trajectories.
IdentityEstimate apL1Identity(const BernoulliCocycle& c, std::size_t n0, std::size_t n1, std::size_t samples, const Rng& stream, unsigned workers = 1);

/// Random chain of length n whose links have gap ratio > margin / varkappa
/// and consecutive angle ratios > margin * epsilon. Dimension 2 or 3.
std::vector<Matrix> generateHyperbolicChain(std::size_t n, int dim, double epsilon, double varkappa, double margin, Rng& rng);

struct ChainCorpusCase {
  std::vector<Matrix> chain;
  double epsilon = 0.0;
  double varkappa = 0.0;
};

/// The seeded corpus used for calibration and acceptance: chains of length
/// 3..40 in dimensions 2 and 3 meeting the hypotheses with the given margin.
std::vector<ChainCorpusCase> hyperbolicChainCorpus(std::size_t count, std::uint64_t seed, double margin = 2.0, double gateC = kDefaultGateC);

struct ApCalibration {
  double maxRatio = 0.0;  // max residual / (n varkappa / epsilon^2)
  double capC = 0.0;      // maxRatio * safety, rounded up to two significant digits
  std::size_t chains = 0;
};

ApCalibration calibrateApConstant(std::size_t chains, std::uint64_t seed, double safety = kApCalibrationSafety);

}  // namespace lyap
