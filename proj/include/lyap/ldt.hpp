#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/measure.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// Stream labels of the two disjoint batches of a fiber deviation run.
inline constexpr std::uint64_t kCalibrationStream = 0xca11b4a7e0000001ULL;
inline constexpr std::uint64_t kMeasurementStream = 0x3ea5b4e3e0000002ULL;

/// Points with fewer positive hits are left out of the rate fit.
inline constexpr std::size_t kMinHitsForFit = 10;
inline const std::vector<std::size_t> kDefaultScales = {25, 50, 100, 200, 400};

struct DeviationPoint {
  std::size_t scale = 0;
  double pHat = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double center = 0.0;  // the mean the deviation is measured from
};

/// Empirical deviation probabilities p(n) = P(|average - mean| > epsilon) and
/// an exponential rate fitted as p(n) ~ exp(-c n).
struct DeviationCurve {
  double epsilon = 0.0;
  std::vector<DeviationPoint> points;
  std::optional<double> fittedRate;
  double rateStdError = 0.0;
  double fitQuality = 0.0;   // R^2 of log p vs n over the fitted points
  std::size_t fittedPoints = 0;
  bool belowResolution = false;  // no hits at any scale
  double rateLowerBound = 0.0;   // log(samples) / n_min when below resolution
};

/// Least-squares rate from points with at least kMinHitsForFit hits; needs
/// three such points.
DeviationCurve fitDeviationCurve(double epsilon, std::vector<DeviationPoint> points);

struct DeviationOptions {
  unsigned workers = 1;
  /// Samples are indexed [firstSample, firstSample + samples); disjoint index
  /// ranges give disjoint subsamples of one sample set.
  std::size_t firstSample = 0;
  /// Calibration batch size for fiber runs; 0 means same as `samples`.
  std::size_t calibrationSamples = 0;
};

/// Base LDT: deviation of Birkhoff averages (1/n) sum xi(A(T^j x)) from
/// int xi dmu.
DeviationCurve baseDeviation(const BernoulliCocycle& c, const Observable& xi, double epsilon, const std::vector<std::size_t>& scales, std::size_t samples,
                             const Rng& stream, const DeviationOptions& options = {});

/// Fiber LDT: deviation of (1/n) log |A^(n)(x)| from L1^(n), the latter
/// estimated on an independent calibration batch at the same scale.
DeviationCurve fiberDeviation(const BernoulliCocycle& c, double epsilon, const std::vector<std::size_t>& scales, std::size_t samples, const Rng& stream,
                              const DeviationOptions& options = {});

enum class DeviationKind { Base, Fiber };

std::string toString(DeviationKind k);
DeviationKind parseDeviationKind(const std::string& name);

struct SweepOptions {
  DeviationKind kind = DeviationKind::Fiber;
  double deltaBar = 0.05;
  std::size_t perturbations = 16;
  PerturbationMode mode = PerturbationMode::Weights;
  double epsilon = 0.1;
  std::vector<std::size_t> scales = kDefaultScales;
  std::size_t samples = 10000;
  Observable observable;  // base sweeps only
  unsigned workers = 1;
};

struct SweepEntry {
  AtomicMeasure measure;
  double distance = 0.0;
  DeviationCurve curve;
};

struct UniformitySweep {
  AtomicMeasure center;
  double deltaBar = 0.0;
  DeviationCurve centerCurve;
  std::vector<SweepEntry> perturbations;
  std::optional<double> worstRate;  // min fitted rate over the perturbations
  bool allRatesResolved = false;
  bool boundedAwayFromZero = false;
};

/// Finite sweep of a W1 ball: every perturbation is measured on the same
/// deviation stream, so a vanishing perturbation reproduces the center curve.
UniformitySweep uniformSweep(const BernoulliCocycle& center, const SweepOptions& options, const Rng& stream);

/// Quasi-irreducibility for 2x2 atoms: false only if a line invariant under
/// every atom carries an exponent below the top one.
bool quasiIrreducible2d(const AtomicMeasure& m);

}  // namespace lyap
