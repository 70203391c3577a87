#include "lyap/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyap/error.hpp"

namespace lyap {

BernoulliCocycle::BernoulliCocycle(AtomicMeasure measure, bool special) : measure_(std::move(measure)), special_(special) {
  require(dim() >= 2 && dim() <= 8, "cocycle fibers must have dimension 2..8");
  if (special_) {
    for (std::size_t i = 0; i < measure_.size(); ++i)
      require(std::abs(std::abs(measure_.atom(i).determinant()) - 1.0) <= 1e-9, "atom " + std::to_string(i) + " is not in SL(d)");
  }
  double acc = 0;
  cumulative_.reserve(measure_.size());
  for (double w : measure_.weights()) cumulative_.push_back(acc += w);
}

std::uint32_t BernoulliCocycle::symbolFor(double u) const {
  const double scaled = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), scaled);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
  // Skip zero-weight symbols sitting at the end of the cumulative table.
  while (idx > 0 && measure_.weight(idx) == 0.0) --idx;
  return static_cast<std::uint32_t>(idx);
}

Trajectory sampleTrajectory(const BernoulliCocycle& c, std::size_t n, Rng& rng) {
  require(n >= 1, "trajectory length must be positive");
  Trajectory t;
  t.seed = rng.key();
  t.symbols.resize(n);
  for (auto& s : t.symbols) s = c.symbolFor(rng.uniform());
  return t;
}

ProductAccumulator::ProductAccumulator(int dim) : current_(Matrix::identity(dim)), scratch_(dim) {}

void ProductAccumulator::reset() {
  current_ = Matrix::identity(current_.dim());
  logScale_ = 0.0;
  steps_ = 0;
}

void ProductAccumulator::push(const Matrix& factor) {
  multiplyInto(factor, current_, scratch_);
  std::swap(current_, scratch_);
  ++steps_;
  // Fixed cadence, plus an early pass when entries drift toward over/underflow.
  const double size = current_.maxAbs();
  if (steps_ % kRenormalizeEvery == 0 || size > 1e150 || (size < 1e-150 && size > 0.0)) renormalize();
}

void ProductAccumulator::renormalize() {
  const double norm = operatorNorm(current_);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw LabError(ErrorCode::RankCollapse, "product vanished or overflowed after " + std::to_string(steps_) + " steps");
  current_ *= 1.0 / norm;
  logScale_ += std::log(norm);
}

double ProductAccumulator::logNorm() const {
  const double norm = operatorNorm(current_);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw LabError(ErrorCode::RankCollapse, "product vanished or overflowed after " + std::to_string(steps_) + " steps");
  return logScale_ + std::log(norm);
}

ScaledMatrix ProductAccumulator::value() const {
  logNorm();  // surfaces collapse
  return {current_, logScale_};
}

ScaledMatrix iterate(std::span<const Matrix> atoms, std::span<const std::uint32_t> symbols) {
  require(!atoms.empty(), "iterate needs atoms");
  ProductAccumulator acc(atoms.front().dim());
  for (auto s : symbols) {
    require(s < atoms.size(), "trajectory symbol out of range");
    acc.push(atoms[s]);
  }
  return acc.value();
}

ScaledMatrix iterate(const BernoulliCocycle& c, const Trajectory& t) { return iterate(c.measure().atoms(), t.symbols); }

SchrodingerCocycle::SchrodingerCocycle(std::vector<double> potentialValues, std::vector<double> probabilities, double energy)
    : values_(std::move(potentialValues)), probabilities_(std::move(probabilities)), energy_(energy) {
  require(!values_.empty() && values_.size() == probabilities_.size(), "potential needs matching values and probabilities");
  require(std::isfinite(energy_), "energy must be finite");
  double total = 0;
  for (double p : probabilities_) {
    require(p >= 0.0, "potential probabilities must be non-negative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, "potential probabilities must sum to 1");
}

Matrix SchrodingerCocycle::transferMatrix(double omega) const { return Matrix{{omega - energy_, -1.0}, {1.0, 0.0}}; }

BernoulliCocycle schrodingerAsBernoulli(const SchrodingerCocycle& s) {
  std::vector<Matrix> atoms;
  for (double w : s.potentialValues()) atoms.push_back(s.transferMatrix(w));
  return BernoulliCocycle(AtomicMeasure(std::move(atoms), s.probabilities()), true);
}

}  // namespace lyap
