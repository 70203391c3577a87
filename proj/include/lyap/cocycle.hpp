#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lyap/measure.hpp"
#include "lyap/rng.hpp"
#include "lyap/smallmat.hpp"

namespace lyap {

/// Steps between renormalisations of a running product.
inline constexpr int kRenormalizeEvery = 25;

/// A matrix stored as exp(logScale) * matrix, so that products of thousands
/// of factors stay representable.
struct ScaledMatrix {
  Matrix matrix;
  double logScale = 0.0;

  double logNorm() const { return logScale + logOperatorNorm(matrix); }
};

/// Locally constant cocycle over a Bernoulli shift: symbol i is drawn with
/// probability weight(i) and acts by atom(i).
class BernoulliCocycle {
 public:
  explicit BernoulliCocycle(AtomicMeasure measure, bool special = false);

  const AtomicMeasure& measure() const noexcept { return measure_; }
  int dim() const noexcept { return measure_.dim(); }
  bool special() const noexcept { return special_; }
  std::size_t symbolCount() const noexcept { return measure_.size(); }
  const Matrix& atom(std::size_t symbol) const { return measure_.atom(symbol); }

  /// Inverse-CDF symbol for u in [0, 1). Two cocycles fed the same uniforms
  /// produce coupled trajectories.
  std::uint32_t symbolFor(double u) const;

 private:
  AtomicMeasure measure_;
  bool special_;
  std::vector<double> cumulative_;
};

struct Trajectory {
  std::vector<std::uint32_t> symbols;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return symbols.size(); }
};

Trajectory sampleTrajectory(const BernoulliCocycle& c, std::size_t n, Rng& rng);

/// Running product A_{k-1} ... A_0 with periodic renormalisation.
class ProductAccumulator {
 public:
  explicit ProductAccumulator(int dim);

  void reset();
  void push(const Matrix& factor);
  std::size_t steps() const noexcept { return steps_; }
  /// log of the operator norm of the full product.
  double logNorm() const;
  ScaledMatrix value() const;

 private:
  void renormalize();

  Matrix current_;
  Matrix scratch_;
  double logScale_ = 0.0;
  std::size_t steps_ = 0;
};

/// Ordered product of atoms[symbols[k]] for k in order (last symbol leftmost).
ScaledMatrix iterate(std::span<const Matrix> atoms, std::span<const std::uint32_t> symbols);
ScaledMatrix iterate(const BernoulliCocycle& c, const Trajectory& t);

/// S_E(omega) = [[omega - E, -1], [1, 0]] driven by a finitely supported
/// potential distribution rho.
class SchrodingerCocycle {
 public:
  SchrodingerCocycle(std::vector<double> potentialValues, std::vector<double> probabilities, double energy);

  const std::vector<double>& potentialValues() const noexcept { return values_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  double energy() const noexcept { return energy_; }

  SchrodingerCocycle withEnergy(double energy) const { return SchrodingerCocycle(values_, probabilities_, energy); }
  Matrix transferMatrix(double omega) const;

 private:
  std::vector<double> values_;
  std::vector<double> probabilities_;
  double energy_;
};

BernoulliCocycle schrodingerAsBernoulli(const SchrodingerCocycle& s);

}  // namespace lyap
