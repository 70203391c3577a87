#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lyap/avalanche.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// psi(n) = n * exp(rate * n * (1/2 - deficit)): the largest next scale the
/// inductive step allows for a deviation rate r(n) = exp(-rate * n).
double psi(double n, double rate, double exponentDeficit);
/// Inverse of psi on (0, inf).
double phi(double m, double rate, double exponentDeficit);
/// n^{1+} realised as n * ceil(log n).
std::size_t superLinearFloor(std::size_t n);

struct ScheduleParams {
  std::size_t n0 = 2;
  double rate = 0.0;
  double exponentDeficit = 0.05;
  std::size_t steps = 1;
  std::size_t cap = 100000;
  double c2 = kInductiveConstant;
  double eta0 = 0.0;
  double theta0 = 0.0;
  double kappa = 0.0;
  double epsilon = 0.0;
};

struct ScaleBudget {
  std::size_t k = 0;
  std::size_t n = 0;
  double eta = 0.0;
  double theta = 0.0;
  bool feasible = false;     // 2 theta + 4 eta < kappa - 12 epsilon
  bool windowValid = true;   // n >= n_{k-1} * ceil(log n_{k-1})
};

struct ScaleSchedule {
  std::vector<ScaleBudget> budgets;
  ScheduleParams params;
  bool truncated = false;
  std::string diagnostic;
};

/// n_{k+1} = min(floor(psi(n_k)), cap), eta_{k+1} = C2 n_k / n_{k+1},
/// theta_{k+1} = theta_k + 4 eta_k + C2 n_k / n_{k+1}. Stops early when the
/// scale cannot grow or a budget turns infeasible.
ScaleSchedule scheduleScales(const ScheduleParams& params);

struct InductiveStep {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  double eta0 = 0.0;
  double theta0 = 0.0;
  double c2 = kInductiveConstant;
  std::size_t hardCap = 100000;
};

/// Step k -> k+1 of a schedule.
InductiveStep stepOf(const ScaleSchedule& schedule, std::size_t k);

struct InequalityCheck {
  double value = 0.0;
  double stdError = 0.0;
  double bound = 0.0;
  bool pass = false;  // value < bound + 3 stdError
};

struct InductiveStepReport {
  InductiveStep step;
  InequalityCheck hypothesisEta;    // L1^(n0) - L1^(2 n0) < eta0
  InequalityCheck hypothesisTheta;  // |L1^(n0)(nu) - L1^(n0)(mu)| < theta0
  InequalityCheck identity;         // |L1^(n1) + L1^(n0) - 2 L1^(2 n0)| < C2 n0 / n1
  InequalityCheck etaNext;          // L1^(n1) - L1^(2 n1) < eta1
  InequalityCheck thetaNext;        // |L1^(n1)(nu) - L1^(n1)(mu)| < theta1
  std::size_t samples = 0;
};

/// Monte Carlo check of one inductive step for nu (optionally against a
/// reference measure mu; without one, nu is its own reference).
InductiveStepReport checkInductiveStep(const BernoulliCocycle& nu, const InductiveStep& step, std::size_t samples, const Rng& stream, unsigned workers = 1,
                                       const BernoulliCocycle* mu = nullptr);

struct GapRatioCheck {
  std::size_t n = 0;
  double threshold = 0.0;           // kappa - 2 theta - 3 epsilon
  double violationFraction = 0.0;   // P((1/n) log gr(A^(n)) <= threshold)
  double meanLogGap = 0.0;          // L1^(n) - L2^(n)
  double stdError = 0.0;
  double gapLowerBound = 0.0;       // threshold * (1 - violationFraction)
  std::size_t samples = 0;
};

GapRatioCheck gapRatioCheck(const BernoulliCocycle& c, std::size_t n, double kappaEst, double theta, double epsilon, std::size_t samples, const Rng& stream,
                            unsigned workers = 1);

/// Produces a pair of cocycles at W1 distance about delta.
using PairGenerator = std::function<std::pair<BernoulliCocycle, BernoulliCocycle>(double delta, Rng& rng)>;

/// (center, center reweighted to W1 distance delta).
PairGenerator weightShiftPairs(const BernoulliCocycle& center);
/// (S at energy E, S at energy E + delta).
PairGenerator energyShiftPairs(const SchrodingerCocycle& center);

struct HolderPair {
  double delta = 0.0;
  double h = 0.0;        // exact W1 of the pair
  double deltaL = 0.0;   // |L1(nu1) - L1(nu2)| at the reference scale
  double stdError = 0.0;
  bool resolved = false; // deltaL > 2 stdError
};

struct ModulusFit {
  std::vector<HolderPair> pairs;
  std::optional<double> exponent;
  double exponentStdError = 0.0;
  double constant = 0.0;
  double fitQuality = 0.0;
  std::size_t usedPairs = 0;
  double noiseFloor = 0.0;  // largest 2 stdError among the pairs
};

ModulusFit holderExperiment(const PairGenerator& pairs, const std::vector<double>& deltas, std::size_t pairsPerDelta, std::size_t nRef, std::size_t samples,
                            const Rng& stream, unsigned workers = 1);
ModulusFit holderExperiment(const BernoulliCocycle& center, const std::vector<double>& deltas, std::size_t pairsPerDelta, std::size_t nRef,
                            std::size_t samples, const Rng& stream, unsigned workers = 1);

struct ConvergenceParams {
  double rate = 0.1;
  double exponentDeficit = 0.05;
  double c2 = kInductiveConstant;
  std::size_t budgetCap = 4096;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double estimate = 0.0;
  double stdError = 0.0;
  double excess = 0.0;  // L1^(n) - reference
  double excessStdError = 0.0;
  double bound = 0.0;   // C2 phi(n) / n
  std::size_t nPlusPlus = 0;
  double threeScale = 0.0;  // |L1^(n++) + L1^(n) - 2 L1^(2n)|
  double threeScaleStdError = 0.0;
  double threeScaleBound = 0.0;  // C2 n / n++
};

/// The reference is the estimate at the largest scale.
std::vector<ConvergenceRow> speedOfConvergence(const BernoulliCocycle& c, const std::vector<std::size_t>& scales, std::size_t samples, const Rng& stream,
                                               const ConvergenceParams& params = {}, unsigned workers = 1);

}  // namespace lyap
