#include "printers.hpp"

#include <cmath>

#include "lyap/error.hpp"
#include "lyap/ldt.hpp"
#include "oracles.hpp"

using namespace lyap;

namespace {

BernoulliCocycle coin() { return BernoulliCocycle(AtomicMeasure({Matrix{{2, 0}, {0, 0.5}}, Matrix{{0.5, 0}, {0, 2}}}, {0.5, 0.5})); }

const Observable kHeads = [](const Matrix& g) { return g(0, 0) > 1.0 ? 1.0 : 0.0; };

double exactCoinDeviation(int n) {
  // |k/n - 1/2| > 1/10 in integers.
  return oracle::binomialExpectation(n, 0.5, [n](int k) { return 5 * std::abs(2 * k - n) > n ? 1.0 : 0.0; });
}

double exactWalkDeviation(int n, double eps) {
  const double l = oracle::commutingFiniteScale(n, 0.5, 1.0, -1.0);
  return oracle::binomialExpectation(n, 0.5, [&](int k) { return std::abs(std::abs(2.0 * k - n) / n - l) > eps ? 1.0 : 0.0; });
}

}  // namespace

TEST_CASE("rate fit recovers an exact exponential") {
  std::vector<DeviationPoint> pts;
  for (std::size_t n : {10u, 20u, 40u, 80u}) pts.push_back({n, 0.3 * std::exp(-0.05 * static_cast<double>(n)), 1000000, 1000, 0.0});
  const auto c = fitDeviationCurve(0.1, pts);
  REQUIRE(c.fittedRate);
  CHECK(*c.fittedRate == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(c.fitQuality == doctest::Approx(1.0));
  CHECK(c.fittedPoints == 4);
}

TEST_CASE("sparse and empty curves are flagged") {
  std::vector<DeviationPoint> pts = {{10, 0.01, 1000, 10, 0.0}, {20, 0.001, 1000, 1, 0.0}, {40, 0.0, 1000, 0, 0.0}};
  const auto sparse = fitDeviationCurve(0.1, pts);
  CHECK_FALSE(sparse.fittedRate);
  CHECK(sparse.fittedPoints == 1);
  std::vector<DeviationPoint> none = {{10, 0.0, 1000, 0, 0.0}, {20, 0.0, 1000, 0, 0.0}};
  const auto empty = fitDeviationCurve(0.1, none);
  CHECK(empty.belowResolution);
  CHECK(empty.rateLowerBound == doctest::Approx(std::log(1000.0) / 10.0));
}

TEST_CASE("base deviations match binomial enumeration") {
  const std::vector<std::size_t> scales = {25, 50, 100};
  const std::size_t samples = 20000;
  const auto curve = baseDeviation(coin(), kHeads, 0.1, scales, samples, Rng(701));
  REQUIRE(curve.points.size() == 3);
  for (const auto& p : curve.points) {
    const double exact = exactCoinDeviation(static_cast<int>(p.scale));
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
    CHECK(std::abs(p.pHat - exact) < 4.0 * se);
    CHECK(p.center == doctest::Approx(0.5));
  }
}

TEST_CASE("fiber deviations of a commuting walk match enumeration") {
  const BernoulliCocycle walk(AtomicMeasure({Matrix::diagonal({M_E, 1.0 / M_E}), Matrix::diagonal({1.0 / M_E, M_E})}, {0.5, 0.5}));
  const std::size_t samples = 20000;
  const auto curve = fiberDeviation(walk, 0.3, {5, 10, 15, 20, 25, 30}, samples, Rng(702));
  for (const auto& p : curve.points) {
    const double exact = exactWalkDeviation(static_cast<int>(p.scale), 0.3);
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
    CHECK(std::abs(p.pHat - exact) < 4.0 * se);
  }
  REQUIRE(curve.fittedRate);
  CHECK(*curve.fittedRate > 0.0);
}

TEST_CASE("disjoint sample ranges are disjoint subsamples") {
  DeviationOptions first, second;
  second.firstSample = 1000;
  const auto a = baseDeviation(coin(), kHeads, 0.1, {25}, 1000, Rng(703), first);
  const auto b = baseDeviation(coin(), kHeads, 0.1, {25}, 1000, Rng(703), second);
  DeviationOptions wide;
  const auto both = baseDeviation(coin(), kHeads, 0.1, {25}, 2000, Rng(703), wide);
  CHECK(a.points[0].hits + b.points[0].hits == both.points[0].hits);
  DeviationOptions four;
  four.workers = 4;
  CHECK(baseDeviation(coin(), kHeads, 0.1, {25}, 2000, Rng(703), four).points[0].hits == both.points[0].hits);
}

TEST_CASE("uniform sweep over a shrinking ball reproduces the center") {
  SweepOptions opt;
  opt.kind = DeviationKind::Base;
  opt.observable = kHeads;
  opt.deltaBar = 1e-12;
  opt.perturbations = 3;
  // Off the lattice of k/n - 1/2, so a 1e-12 shift of the mean flips no sample.
  opt.epsilon = 0.113;
  opt.scales = {25, 50, 100};
  opt.samples = 4000;
  const auto sw = uniformSweep(coin(), opt, Rng(704));
  REQUIRE(sw.perturbations.size() == 3);
  for (const auto& e : sw.perturbations) {
    CHECK(e.distance <= 1e-12);
    for (std::size_t k = 0; k < e.curve.points.size(); ++k) CHECK(e.curve.points[k].hits == sw.centerCurve.points[k].hits);
  }
}

TEST_CASE("fiber sweep on a hyperbolic ensemble stays bounded away from zero") {
  SweepOptions opt;
  opt.kind = DeviationKind::Fiber;
  opt.deltaBar = 0.05;
  opt.perturbations = 4;
  opt.mode = PerturbationMode::Both;
  opt.epsilon = 0.015;
  opt.scales = {10, 20, 40, 60};
  opt.samples = 4000;
  const BernoulliCocycle c(AtomicMeasure({Matrix{{2, 1}, {1, 1}}, Matrix{{1, 1}, {1, 2}}}, {0.5, 0.5}));
  const auto sw = uniformSweep(c, opt, Rng(705));
  for (const auto& e : sw.perturbations) CHECK(e.distance <= 0.05);
  CHECK(sw.allRatesResolved);
  CHECK(sw.boundedAwayFromZero);
  REQUIRE(sw.worstRate);
  CHECK(*sw.worstRate > 0.0);
}

TEST_CASE("quasi-irreducibility of 2x2 ensembles") {
  CHECK(quasiIrreducible2d(AtomicMeasure({Matrix{{2, 1}, {1, 1}}, Matrix{{1, 1}, {1, 2}}}, {0.5, 0.5})));
  // e1 is invariant and carries log 2, the top exponent.
  CHECK(quasiIrreducible2d(AtomicMeasure({Matrix{{2, 1}, {0, 0.5}}, Matrix{{2, -1}, {0, 0.5}}}, {0.5, 0.5})));
  // e1 is invariant with exponent log(1/2) below the top.
  CHECK_FALSE(quasiIrreducible2d(AtomicMeasure({Matrix{{0.5, 1}, {0, 2}}, Matrix{{0.5, -1}, {0, 2}}}, {0.5, 0.5})));
  // Both axes are invariant; e2 carries the lower exponent.
  CHECK_FALSE(quasiIrreducible2d(AtomicMeasure({Matrix{{2, 0}, {0, 0.5}}, Matrix{{3, 0}, {0, 1.0 / 3}}}, {0.5, 0.5})));
  CHECK(quasiIrreducible2d(AtomicMeasure::dirac(Matrix::rotation(1.0))));
  try {
    (void)quasiIrreducible2d(AtomicMeasure::dirac(Matrix::identity(3)));
    FAIL("dimension 3 accepted");
  } catch (const LabError& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDimension);
  }
}

TEST_CASE("deviation contracts") {
  CHECK_THROWS_AS(baseDeviation(coin(), kHeads, 0.0, {10}, 100, Rng(1)), LabError);
  CHECK_THROWS_AS(baseDeviation(coin(), kHeads, 0.1, {20, 10}, 100, Rng(1)), LabError);
  CHECK_THROWS_AS(fiberDeviation(coin(), 0.1, {}, 100, Rng(1)), LabError);
  CHECK(parseDeviationKind("base") == DeviationKind::Base);
  CHECK_THROWS_AS(parseDeviationKind("x"), LabError);
}
