#pragma once

#include <cstdint>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// Monte Carlo estimate of Lambda_j^(n) = E[(1/n) log |wedge_j A^(n)|], in
/// nats per step. block = 1 is the top finite-scale exponent L1^(n).
struct FiniteScaleEstimate {
  std::size_t scale = 0;
  double mean = 0.0;
  double stdError = 0.0;
  std::size_t samples = 0;
  int block = 1;
  std::uint64_t seed = 0;
};

/// log |wedge_j A^(m)| at each checkpoint m, for `samples` independent
/// trajectories of length max(checkpoints). Sample i uses stream.child(i).
/// Result is indexed [sample][checkpoint]; sample i draws from
/// stream.child(firstSample + i).
std::vector<std::vector<double>> sampleLogNormPrefixes(const BernoulliCocycle& c, const std::vector<std::size_t>& checkpoints, std::size_t samples,
                                                       int block, const Rng& stream, unsigned workers = 1, std::size_t firstSample = 0);

FiniteScaleEstimate estimateFiniteScale(const BernoulliCocycle& c, std::size_t n, std::size_t samples, int block, const Rng& stream, unsigned workers = 1);

/// log spectral radius of wedge_j g: the Lyapunov exponent block of the
/// constant cocycle g. Throws MinusInfinityExponent when wedge_j g is nilpotent.
double exactConstantCocycle(const Matrix& g, int block = 1);

/// Difference L1^(n)(a) - L1^(n)(b) on coupled trajectories: sample i of both
/// cocycles consumes the uniforms of stream.child(i), so the standard error
/// is that of the per-sample differences.
struct PairedEstimate {
  double difference = 0.0;
  double stdError = 0.0;
  double meanA = 0.0;
  double meanB = 0.0;
  std::size_t samples = 0;
};

PairedEstimate estimatePairedDifference(const BernoulliCocycle& a, const BernoulliCocycle& b, std::size_t n, std::size_t samples, const Rng& stream,
                                        unsigned workers = 1);

/// Estimates at strictly increasing scales, each scale on its own stream.
std::vector<FiniteScaleEstimate> kingmanCurve(const BernoulliCocycle& c, const std::vector<std::size_t>& scales, std::size_t samples, const Rng& stream,
                                              unsigned workers = 1, int block = 1);

}  // namespace lyap
