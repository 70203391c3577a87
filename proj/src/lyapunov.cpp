#include "lyap/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lyap/error.hpp"
#include "lyap/parallel.hpp"
#include "lyap/stats.hpp"

namespace lyap {

std::vector<std::vector<double>> sampleLogNormPrefixes(const BernoulliCocycle& c, const std::vector<std::size_t>& checkpoints, std::size_t samples,
                                                       int block, const Rng& stream, unsigned workers, std::size_t firstSample) {
  require(!checkpoints.empty(), "need at least one checkpoint");
  require(std::is_sorted(checkpoints.begin(), checkpoints.end()) && checkpoints.front() >= 1, "checkpoints must be positive and ascending");
  require(block >= 1 && block <= c.dim(), "block index out of range");
  std::vector<Matrix> atoms;
  atoms.reserve(c.symbolCount());
  for (const auto& a : c.measure().atoms()) atoms.push_back(exteriorPower(a, block));
  const std::size_t length = checkpoints.back();

  std::vector<std::vector<double>> out(samples, std::vector<double>(checkpoints.size()));
  parallelFor(samples, workers, [&](std::size_t i) {
    Rng rng = stream.child(firstSample + i);
    const Trajectory t = sampleTrajectory(c, length, rng);
    ProductAccumulator acc(atoms.front().dim());
    std::size_t next = 0;
    for (std::size_t k = 0; k < length; ++k) {
      acc.push(atoms[t.symbols[k]]);
      while (next < checkpoints.size() && checkpoints[next] == k + 1) out[i][next++] = acc.logNorm();
    }
  });
  return out;
}

FiniteScaleEstimate estimateFiniteScale(const BernoulliCocycle& c, std::size_t n, std::size_t samples, int block, const Rng& stream, unsigned workers) {
  require(n >= 1, "scale must be positive");
  require(samples >= 2, "need at least two samples for a standard error");
  const auto logs = sampleLogNormPrefixes(c, {n}, samples, block, stream, workers);
  std::vector<double> values(samples);
  for (std::size_t i = 0; i < samples; ++i) values[i] = logs[i][0] / static_cast<double>(n);
  const auto e = meanEstimate(values);
  return {n, e.mean, e.stdError, samples, block, stream.key()};
}

double exactConstantCocycle(const Matrix& g, int block) {
  require(g.allFinite(), "constant cocycle needs finite entries");
  // Repeated squaring: log rho = lim 2^-k log |M^(2^k)|, with M renormalised
  // after every squaring.
  Matrix m = exteriorPower(g, block);
  double norm = operatorNorm(m);
  if (norm == 0.0) throw LabError(ErrorCode::MinusInfinityExponent, "exterior power is the zero matrix");
  m *= 1.0 / norm;
  double logScale = std::log(norm);  // log |M^(2^k)| = logScale + log |m|
  double power = 1.0;
  double previous = logScale + std::log(operatorNorm(m));
  Matrix sq(m.dim());
  for (int k = 0; k < 200; ++k) {
    multiplyInto(m, m, sq);
    const double n2 = operatorNorm(sq);
    if (!(n2 > 0.0)) throw LabError(ErrorCode::MinusInfinityExponent, "exterior power is nilpotent");
    logScale = 2.0 * logScale + std::log(n2);
    power *= 2.0;
    sq *= 1.0 / n2;
    std::swap(m, sq);
    const double estimate = logScale / power;
    if (std::abs(estimate - previous) < 1e-12 && k > 4) return estimate;
    previous = estimate;
  }
  return previous;
}

PairedEstimate estimatePairedDifference(const BernoulliCocycle& a, const BernoulliCocycle& b, std::size_t n, std::size_t samples, const Rng& stream,
                                        unsigned workers) {
  require(a.dim() == b.dim(), "paired estimate needs cocycles of one dimension");
  require(n >= 1 && samples >= 2, "paired estimate needs n >= 1 and two samples");
  std::vector<double> va(samples), vb(samples), diff(samples);
  const double dn = static_cast<double>(n);
  parallelFor(samples, workers, [&](std::size_t i) {
    Rng ra = stream.child(i);
    Rng rb = stream.child(i);
    va[i] = iterate(a, sampleTrajectory(a, n, ra)).logNorm() / dn;
    vb[i] = iterate(b, sampleTrajectory(b, n, rb)).logNorm() / dn;
    diff[i] = va[i] - vb[i];
  });
  const auto d = meanEstimate(diff);
  return {d.mean, d.stdError, meanEstimate(va).mean, meanEstimate(vb).mean, samples};
}

std::vector<FiniteScaleEstimate> kingmanCurve(const BernoulliCocycle& c, const std::vector<std::size_t>& scales, std::size_t samples, const Rng& stream,
                                              unsigned workers, int block) {
  require(!scales.empty(), "need at least one scale");
  for (std::size_t i = 1; i < scales.size(); ++i) require(scales[i] > scales[i - 1], "scales must be strictly increasing");
  std::vector<FiniteScaleEstimate> curve;
  for (std::size_t n : scales) curve.push_back(estimateFiniteScale(c, n, samples, block, stream.child("scale:" + std::to_string(n)), workers));
  return curve;
}

}  // namespace lyap
