#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "lyap/rng.hpp"
#include "lyap/smallmat.hpp"

namespace lyap {

/// Ground metric between atoms. Operator is the default and the one every
/// experiment uses; Frobenius exists for comparison runs.
enum class GroundMetric { Operator, Frobenius };

std::string toString(GroundMetric m);
GroundMetric parseGroundMetric(const std::string& name);

double distance(const Matrix& a, const Matrix& b, GroundMetric metric = GroundMetric::Operator);

/// Finitely supported probability measure on matrices of one dimension.
class AtomicMeasure {
 public:
  AtomicMeasure(std::vector<Matrix> atoms, std::vector<double> weights, GroundMetric metric = GroundMetric::Operator);

  static AtomicMeasure dirac(Matrix atom, GroundMetric metric = GroundMetric::Operator);

  std::size_t size() const noexcept { return atoms_.size(); }
  int dim() const noexcept { return atoms_.front().dim(); }
  const std::vector<Matrix>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const Matrix& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  GroundMetric metric() const noexcept { return metric_; }

  /// Same measure with identical atoms collapsed into one.
  AtomicMeasure merged() const;
  /// Largest pairwise ground distance between atoms.
  double diameter() const;

 private:
  std::vector<Matrix> atoms_;
  std::vector<double> weights_;
  GroundMetric metric_;
};

/// Scalar s embedded as s * I_2, so that the operator-norm distance between
/// two embedded scalars is |s - t|.
Matrix embedScalar(double s);
AtomicMeasure scalarMeasure(const std::vector<double>& points, const std::vector<double>& weights);

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // rows x cols, row-major
  double cost = 0.0;

  double at(std::size_t i, std::size_t j) const { return mass[i * cols + j]; }
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

/// Exact 1-Wasserstein distance with an optimal coupling.
TransportResult wasserstein1(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Exact min-cost transportation problem on a dense cost matrix.
TransportPlan solveTransport(const std::vector<double>& supply, const std::vector<double>& demand, const std::vector<double>& cost);

/// Best value of |int xi dmu - int xi dnu| over `samples` random 1-Lipschitz
/// observables xi(x) = min_i (a_i + d(x, c_i)).
double dualLowerBound(const AtomicMeasure& mu, const AtomicMeasure& nu, int samples, Rng& rng);

using Observable = std::function<double(const Matrix&)>;

double integrate(const Observable& xi, const AtomicMeasure& mu);

/// f(x) = clamp(1 - dist(x, L) / epsilon, 0, 1): equals 1 on L, vanishes off
/// the epsilon-neighbourhood of L, Lipschitz with constant 1 / epsilon.
class LipschitzEnvelope {
 public:
  LipschitzEnvelope(Observable distToSet, double epsilon);

  double operator()(const Matrix& x) const;
  double epsilon() const noexcept { return epsilon_; }
  double lipschitzConstant() const noexcept { return 1.0 / epsilon_; }

 private:
  Observable distToSet_;
  double epsilon_;
};

LipschitzEnvelope lipschitzEnvelope(Observable distToSet, double epsilon);

enum class PerturbationMode { Weights, Atoms, Both };

std::string toString(PerturbationMode m);
PerturbationMode parsePerturbationMode(const std::string& name);

/// Random nu with W1(mu, nu) <= delta, checked with wasserstein1.
AtomicMeasure perturbWithinBall(const AtomicMeasure& mu, double delta, PerturbationMode mode, Rng& rng);

/// Reweights mu along a random zero-sum direction so that W1(mu, nu) equals
/// `target` up to bisection precision.
AtomicMeasure shiftWeightsToDistance(const AtomicMeasure& mu, double target, Rng& rng);

}  // namespace lyap
