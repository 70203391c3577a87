#include "lyap/ldt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lyap/error.hpp"
#include "lyap/lyapunov.hpp"
#include "lyap/parallel.hpp"
#include "lyap/stats.hpp"

namespace lyap {

namespace {

void checkScales(const std::vector<std::size_t>& scales) {
  require(!scales.empty(), "need at least one scale");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    require(scales[i] >= 1, "scales must be positive");
    if (i) require(scales[i] > scales[i - 1], "scales must be strictly increasing");
  }
}

std::size_t countHits(const std::vector<char>& hit) {
  std::size_t h = 0;
  for (char c : hit) h += c ? 1 : 0;
  return h;
}

}  // namespace

DeviationCurve fitDeviationCurve(double epsilon, std::vector<DeviationPoint> points) {
  DeviationCurve curve;
  curve.epsilon = epsilon;
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.scale < b.scale; });
  curve.points = std::move(points);

  std::vector<double> x, y;
  bool anyHit = false;
  for (const auto& p : curve.points) {
    anyHit = anyHit || p.hits > 0;
    if (p.hits >= kMinHitsForFit) {
      x.push_back(static_cast<double>(p.scale));
      y.push_back(std::log(p.pHat));
    }
  }
  curve.fittedPoints = x.size();
  if (!anyHit && !curve.points.empty()) {
    curve.belowResolution = true;
    const auto& first = curve.points.front();
    curve.rateLowerBound = std::log(static_cast<double>(first.samples)) / static_cast<double>(first.scale);
  }
  if (x.size() >= 3) {
    const auto fit = fitLine(x, y);
    curve.fittedRate = -fit.slope;
    curve.rateStdError = fit.slopeStdError;
    curve.fitQuality = fit.rSquared;
  }
  return curve;
}

DeviationCurve baseDeviation(const BernoulliCocycle& c, const Observable& xi, double epsilon, const std::vector<std::size_t>& scales, std::size_t samples,
                             const Rng& stream, const DeviationOptions& options) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(samples >= 1, "need at least one sample");
  checkScales(scales);
  std::vector<double> values(c.symbolCount());
  for (std::size_t s = 0; s < values.size(); ++s) {
    values[s] = xi(c.atom(s));
    if (!std::isfinite(values[s])) throw LabError(ErrorCode::ObservableOverflow, "observable is not finite on atom " + std::to_string(s));
  }
  const double mean = integrate(xi, c.measure());

  std::vector<DeviationPoint> points;
  for (std::size_t n : scales) {
    const Rng scaleStream = stream.child("base:" + std::to_string(n));
    std::vector<char> hit(samples, 0);
    parallelFor(samples, options.workers, [&](std::size_t i) {
      Rng rng = scaleStream.child(options.firstSample + i);
      double sum = 0;
      for (std::size_t k = 0; k < n; ++k) sum += values[c.symbolFor(rng.uniform())];
      hit[i] = std::abs(sum / static_cast<double>(n) - mean) > epsilon;
    });
    const std::size_t hits = countHits(hit);
    points.push_back({n, static_cast<double>(hits) / static_cast<double>(samples), samples, hits, mean});
  }
  return fitDeviationCurve(epsilon, std::move(points));
}

DeviationCurve fiberDeviation(const BernoulliCocycle& c, double epsilon, const std::vector<std::size_t>& scales, std::size_t samples, const Rng& stream,
                              const DeviationOptions& options) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(samples >= 1, "need at least one sample");
  checkScales(scales);
  const std::size_t calSamples = options.calibrationSamples ? options.calibrationSamples : samples;
  require(calSamples >= 2, "calibration batch needs at least two samples");
  const Rng calibration = stream.child(kCalibrationStream);
  const Rng measurement = stream.child(kMeasurementStream);

  std::vector<DeviationPoint> points;
  for (std::size_t n : scales) {
    const double dn = static_cast<double>(n);
    const auto cal = sampleLogNormPrefixes(c, {n}, calSamples, 1, calibration.child(n), options.workers);
    std::vector<double> calValues(calSamples);
    for (std::size_t i = 0; i < calSamples; ++i) calValues[i] = cal[i][0] / dn;
    const double center = meanEstimate(calValues).mean;

    const auto meas = sampleLogNormPrefixes(c, {n}, samples, 1, measurement.child(n), options.workers, options.firstSample);
    std::size_t hits = 0;
    for (const auto& row : meas) hits += std::abs(row[0] / dn - center) > epsilon ? 1 : 0;
    points.push_back({n, static_cast<double>(hits) / static_cast<double>(samples), samples, hits, center});
  }
  return fitDeviationCurve(epsilon, std::move(points));
}

std::string toString(DeviationKind k) { return k == DeviationKind::Base ? "base" : "fiber"; }

DeviationKind parseDeviationKind(const std::string& name) {
  if (name == "base") return DeviationKind::Base;
  if (name == "fiber") return DeviationKind::Fiber;
  throw LabError(ErrorCode::Config, "unknown deviation kind '" + name + "'");
}

UniformitySweep uniformSweep(const BernoulliCocycle& center, const SweepOptions& options, const Rng& stream) {
  require(options.deltaBar > 0.0, "deltaBar must be positive");
  require(options.kind == DeviationKind::Fiber || static_cast<bool>(options.observable), "base sweeps need an observable");
  const Rng measure = stream.child("measure");
  const Rng perturb = stream.child("perturb");
  DeviationOptions dev;
  dev.workers = options.workers;

  auto run = [&](const BernoulliCocycle& c) {
    return options.kind == DeviationKind::Base ? baseDeviation(c, options.observable, options.epsilon, options.scales, options.samples, measure, dev)
                                               : fiberDeviation(c, options.epsilon, options.scales, options.samples, measure, dev);
  };

  UniformitySweep sweep{center.measure(), options.deltaBar, run(center), {}, std::nullopt, true, false};
  for (std::size_t k = 0; k < options.perturbations; ++k) {
    Rng rng = perturb.child(k);
    AtomicMeasure nu = perturbWithinBall(center.measure(), options.deltaBar, options.mode, rng);
    const double w1 = wasserstein1(center.measure(), nu).distance;
    const bool keepsSpecial = center.special() && options.mode == PerturbationMode::Weights;
    BernoulliCocycle cocycle(nu, keepsSpecial);
    sweep.perturbations.push_back({std::move(nu), w1, run(cocycle)});
    const auto& curve = sweep.perturbations.back().curve;
    if (curve.fittedRate) {
      sweep.worstRate = sweep.worstRate ? std::min(*sweep.worstRate, *curve.fittedRate) : *curve.fittedRate;
    } else {
      sweep.allRatesResolved = false;
    }
  }
  sweep.boundedAwayFromZero = sweep.allRatesResolved && sweep.worstRate && *sweep.worstRate > 0.0;
  return sweep;
}

namespace {

struct Line {
  double x, y;
};

bool isScalar(const Matrix& a) { return a(0, 1) == 0.0 && a(1, 0) == 0.0 && a(0, 0) == a(1, 1); }

// Real eigendirections of a non-scalar 2x2 matrix (empty if none).
std::vector<Line> eigenLines(const Matrix& a) {
  const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
  const double tr = p + s, det = p * s - q * r;
  const double disc = tr * tr - 4.0 * det;
  const double scale = std::max(1.0, tr * tr);
  if (disc < -1e-14 * scale) return {};
  const double root = std::sqrt(std::max(0.0, disc));
  std::vector<Line> lines;
  for (double lambda : {0.5 * (tr + root), 0.5 * (tr - root)}) {
    // (A - lambda) v = 0: v = (q, lambda - p) or (lambda - s, r).
    Line v1{q, lambda - p}, v2{lambda - s, r};
    Line v = std::hypot(v1.x, v1.y) >= std::hypot(v2.x, v2.y) ? v1 : v2;
    const double n = std::hypot(v.x, v.y);
    if (n == 0) continue;
    v = {v.x / n, v.y / n};
    const bool dup = std::any_of(lines.begin(), lines.end(), [&](const Line& w) { return std::abs(w.x * v.y - w.y * v.x) < 1e-12; });
    if (!dup) lines.push_back(v);
    if (root == 0.0) break;
  }
  return lines;
}

bool leavesInvariant(const Matrix& a, const Line& v) {
  const double ax = a(0, 0) * v.x + a(0, 1) * v.y;
  const double ay = a(1, 0) * v.x + a(1, 1) * v.y;
  return std::abs(ax * v.y - ay * v.x) <= 1e-9 * std::max(1.0, operatorNorm(a));
}

}  // namespace

bool quasiIrreducible2d(const AtomicMeasure& m) {
  if (m.dim() != 2) throw LabError(ErrorCode::UnsupportedDimension, "quasi-irreducibility test supports 2x2 atoms only");
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.weight(i) > 0.0 && !isScalar(m.atom(i))) active.push_back(i);
  if (active.empty()) return true;  // every line invariant, all exponents equal

  const auto candidates = eigenLines(m.atom(active.front()));
  for (const Line& v : candidates) {
    if (!std::all_of(active.begin(), active.end(), [&](std::size_t i) { return leavesInvariant(m.atom(i), v); })) continue;
    // Triangular in the basis (v, v^perp): exponents are the averages of
    // log|lambda_v| and log|det / lambda_v|.
    double along = 0, quotient = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.weight(i) == 0.0) continue;
      const Matrix& a = m.atom(i);
      const double lambda = (a(0, 0) * v.x + a(0, 1) * v.y) * v.x + (a(1, 0) * v.x + a(1, 1) * v.y) * v.y;
      const double det = a.determinant();
      along += m.weight(i) * std::log(std::abs(lambda));
      quotient += m.weight(i) * (std::log(std::abs(det)) - std::log(std::abs(lambda)));
    }
    if (!(along >= quotient - 1e-12)) return false;
  }
  return true;
}

}  // namespace lyap
