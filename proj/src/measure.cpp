#include "lyap/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lyap/error.hpp"

namespace lyap {

std::string toString(GroundMetric m) { return m == GroundMetric::Operator ? "operator" : "frobenius"; }

GroundMetric parseGroundMetric(const std::string& name) {
  if (name == "operator") return GroundMetric::Operator;
  if (name == "frobenius") return GroundMetric::Frobenius;
  throw LabError(ErrorCode::Config, "unknown ground metric '" + name + "'");
}

double distance(const Matrix& a, const Matrix& b, GroundMetric metric) {
  require(a.dim() == b.dim(), "distance between matrices of different dimension");
  const Matrix diff = a - b;
  if (metric == GroundMetric::Operator) return operatorNorm(diff);
  double s = 0;
  for (double v : diff.data()) s += v * v;
  return std::sqrt(s);
}

AtomicMeasure::AtomicMeasure(std::vector<Matrix> atoms, std::vector<double> weights, GroundMetric metric)
    : atoms_(std::move(atoms)), weights_(std::move(weights)), metric_(metric) {
  require(!atoms_.empty(), "a measure needs at least one atom");
  require(atoms_.size() == weights_.size(), "atom and weight counts differ");
  const int d = atoms_.front().dim();
  double total = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    require(atoms_[i].dim() == d, "all atoms must share one dimension");
    require(std::isfinite(weights_[i]) && weights_[i] >= 0.0, "weights must be non-negative");
    total += weights_[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "weights must sum to 1 (got " + std::to_string(total) + ")");
}

AtomicMeasure AtomicMeasure::dirac(Matrix atom, GroundMetric metric) { return AtomicMeasure({std::move(atom)}, {1.0}, metric); }

AtomicMeasure AtomicMeasure::merged() const {
  std::vector<Matrix> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    auto it = std::find(atoms.begin(), atoms.end(), atoms_[i]);
    if (it == atoms.end()) {
      atoms.push_back(atoms_[i]);
      weights.push_back(weights_[i]);
    } else {
      weights[static_cast<std::size_t>(it - atoms.begin())] += weights_[i];
    }
  }
  return AtomicMeasure(std::move(atoms), std::move(weights), metric_);
}

double AtomicMeasure::diameter() const {
  double d = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) d = std::max(d, distance(atoms_[i], atoms_[j], metric_));
  return d;
}

Matrix embedScalar(double s) { return Matrix::diagonal({s, s}); }

AtomicMeasure scalarMeasure(const std::vector<double>& points, const std::vector<double>& weights) {
  std::vector<Matrix> atoms;
  atoms.reserve(points.size());
  for (double p : points) atoms.push_back(embedScalar(p));
  return AtomicMeasure(std::move(atoms), weights);
}

double integrate(const Observable& xi, const AtomicMeasure& mu) {
  double total = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double v = xi(mu.atom(i));
    if (!std::isfinite(v)) throw LabError(ErrorCode::ObservableOverflow, "observable is not finite on atom " + std::to_string(i));
    total += mu.weight(i) * v;
  }
  return total;
}

double dualLowerBound(const AtomicMeasure& mu, const AtomicMeasure& nu, int samples, Rng& rng) {
  require(samples >= 1, "dualLowerBound needs at least one sample");
  require(mu.metric() == nu.metric() && mu.dim() == nu.dim(), "dualLowerBound needs comparable measures");
  std::vector<const Matrix*> support;
  for (const auto& a : mu.atoms()) support.push_back(&a);
  for (const auto& a : nu.atoms()) support.push_back(&a);
  const std::size_t k = support.size();
  // Distance table from every support point to every potential anchor.
  std::vector<double> dist(k * k);
  double diam = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      dist[i * k + j] = distance(*support[i], *support[j], mu.metric());
      diam = std::max(diam, dist[i * k + j]);
    }

  double best = 0;
  std::vector<std::size_t> anchors;
  std::vector<double> offsets;
  for (int s = 0; s < samples; ++s) {
    const std::size_t count = 1 + rng.below(std::min<std::size_t>(k, 4));
    anchors.clear();
    offsets.clear();
    for (std::size_t a = 0; a < count; ++a) {
      anchors.push_back(rng.below(k));
      offsets.push_back(rng.uniform(0.0, diam));
    }
    auto xi = [&](std::size_t point) {
      double v = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < count; ++a) v = std::min(v, offsets[a] + dist[point * k + anchors[a]]);
      return v;
    };
    double diff = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) diff += mu.weight(i) * xi(i);
    for (std::size_t j = 0; j < nu.size(); ++j) diff -= nu.weight(j) * xi(mu.size() + j);
    best = std::max(best, std::abs(diff));
  }
  return best;
}

LipschitzEnvelope::LipschitzEnvelope(Observable distToSet, double epsilon) : distToSet_(std::move(distToSet)), epsilon_(epsilon) {
  require(epsilon > 0.0, "envelope epsilon must be positive");
}

double LipschitzEnvelope::operator()(const Matrix& x) const {
  const double d = distToSet_(x);
  require(d >= 0.0, "distance to set must be non-negative");
  return std::clamp(1.0 - d / epsilon_, 0.0, 1.0);
}

LipschitzEnvelope lipschitzEnvelope(Observable distToSet, double epsilon) { return LipschitzEnvelope(std::move(distToSet), epsilon); }

std::string toString(PerturbationMode m) {
  switch (m) {
    case PerturbationMode::Weights: return "weights";
    case PerturbationMode::Atoms: return "atoms";
    case PerturbationMode::Both: return "both";
  }
  return "weights";
}

PerturbationMode parsePerturbationMode(const std::string& name) {
  if (name == "weights") return PerturbationMode::Weights;
  if (name == "atoms") return PerturbationMode::Atoms;
  if (name == "both") return PerturbationMode::Both;
  throw LabError(ErrorCode::Config, "unknown perturbation mode '" + name + "'");
}

namespace {

std::vector<double> zeroSumDirection(std::size_t n, Rng& rng) {
  std::vector<double> u(n);
  for (double& v : u) v = rng.normal();
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
  for (double& v : u) v -= mean;
  return u;
}

// Largest t with w + t u >= 0.
double maxStep(const std::vector<double>& w, const std::vector<double>& u) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (u[i] < 0) t = std::min(t, w[i] / -u[i]);
  return t;
}

std::vector<double> stepWeights(const std::vector<double>& w, const std::vector<double>& u, double t) {
  std::vector<double> out(w.size());
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::max(0.0, w[i] + t * u[i]);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

AtomicMeasure perturbWeights(const AtomicMeasure& mu, double delta, Rng& rng) {
  if (mu.size() == 1) return mu;
  const double diam = mu.diameter();
  if (diam == 0.0) return mu;
  const auto u = zeroSumDirection(mu.size(), rng);
  double l1 = 0;
  for (double v : u) l1 += std::abs(v);
  // W1 <= (diam / 2) * |dw|_1, so this step stays inside the ball.
  const double t = std::min(maxStep(mu.weights(), u), 2.0 * delta / (diam * l1)) * rng.uniform(0.05, 1.0);
  return AtomicMeasure(mu.atoms(), stepWeights(mu.weights(), u, t), mu.metric());
}

AtomicMeasure perturbAtoms(const AtomicMeasure& mu, double delta, Rng& rng) {
  std::vector<Matrix> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    Matrix e(a.dim());
    for (double& v : e.data()) v = rng.normal();
    const double norm = distance(e, Matrix(a.dim()), mu.metric());
    const double radius = delta * rng.uniform(0.05, 1.0);
    Matrix moved = a;
    if (norm > 0) moved += (radius / norm) * e;
    atoms.push_back(std::move(moved));
  }
  return AtomicMeasure(std::move(atoms), mu.weights(), mu.metric());
}

}  // namespace

AtomicMeasure perturbWithinBall(const AtomicMeasure& mu, double delta, PerturbationMode mode, Rng& rng) {
  require(delta > 0.0, "perturbation radius must be positive");
  for (int attempt = 0; attempt < 32; ++attempt) {
    const double radius = delta * std::pow(0.5, attempt);
    AtomicMeasure nu = [&] {
      switch (mode) {
        case PerturbationMode::Weights: return perturbWeights(mu, radius, rng);
        case PerturbationMode::Atoms: return perturbAtoms(mu, radius, rng);
        case PerturbationMode::Both: {
          AtomicMeasure half = perturbWeights(mu, 0.5 * radius, rng);
          return perturbAtoms(half, 0.5 * radius, rng);
        }
      }
      return mu;
    }();
    if (wasserstein1(mu, nu).distance <= delta) return nu;
  }
  throw LabError(ErrorCode::PerturbationInfeasible, "no perturbation within W1 radius " + std::to_string(delta));
}

AtomicMeasure shiftWeightsToDistance(const AtomicMeasure& mu, double target, Rng& rng) {
  require(target > 0.0, "target distance must be positive");
  for (int attempt = 0; attempt < 64 && mu.size() > 1; ++attempt) {
    const auto u = zeroSumDirection(mu.size(), rng);
    const double tMax = maxStep(mu.weights(), u);
    auto w1At = [&](double t) { return wasserstein1(mu, AtomicMeasure(mu.atoms(), stepWeights(mu.weights(), u, t), mu.metric())).distance; };
    if (!(w1At(tMax) >= target)) continue;
    // W1(mu, mu + t u) is convex in t and vanishes at 0, hence increasing.
    double lo = 0, hi = tMax;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (w1At(mid) < target ? lo : hi) = mid;
    }
    return AtomicMeasure(mu.atoms(), stepWeights(mu.weights(), u, hi), mu.metric());
  }
  throw LabError(ErrorCode::PerturbationInfeasible, "cannot reweight measure to W1 distance " + std::to_string(target));
}

}  // namespace lyap
