#include "lyap/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lyap/error.hpp"
#include "lyap/lyapunov.hpp"
#include "lyap/stats.hpp"

namespace lyap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logNormOrThrow(const ScaledMatrix& m, std::size_t index) {
  const double n = operatorNorm(m.matrix);
  if (!(n > 0.0)) throw LabError(ErrorCode::DegenerateLink, "chain link " + std::to_string(index) + " is the zero matrix");
  return m.logScale + std::log(n);
}

// Haar-like random orthogonal matrix by Gram-Schmidt on Gaussian columns.
Matrix randomOrthogonal(int d, Rng& rng) {
  Matrix q(d);
  for (int c = 0; c < d; ++c) {
    for (;;) {
      std::vector<double> v(static_cast<std::size_t>(d));
      for (double& x : v) x = rng.normal();
      for (int p = 0; p < c; ++p) {
        double dot = 0;
        for (int r = 0; r < d; ++r) dot += v[static_cast<std::size_t>(r)] * q(r, p);
        for (int r = 0; r < d; ++r) v[static_cast<std::size_t>(r)] -= dot * q(r, p);
      }
      double norm = 0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-8) continue;
      for (int r = 0; r < d; ++r) q(r, c) = v[static_cast<std::size_t>(r)] / norm;
      break;
    }
  }
  return q;
}

}  // namespace

ChainLink makeLink(const Matrix& g) {
  ChainLink link;
  link.block = {g, 0.0};
  const Matrix w = exteriorPower(g, 2);
  const double n = operatorNorm(w);
  link.logWedge2 = n > 0.0 ? std::log(n) : -kInf;
  return link;
}

APReport verifyChain(std::span<const ChainLink> chain, double epsilon, double varkappa, double capC, double gateC) {
  require(chain.size() >= 3, "avalanche chain needs at least three links");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  require(varkappa > 0.0, "varkappa must be positive");
  for (const auto& l : chain) require(l.block.matrix.dim() == chain.front().block.matrix.dim(), "chain links must share one dimension");

  const std::size_t n = chain.size();
  APReport r;
  r.chainLength = n;
  r.epsilon = epsilon;
  r.varkappa = varkappa;
  r.capC = capC;
  r.gateC = gateC;

  std::vector<double> logNorms(n);
  double minLogGap = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    logNorms[i] = logNormOrThrow(chain[i].block, i);
    minLogGap = std::min(minLogGap, 2.0 * logNorms[i] - chain[i].logWedge2);
  }
  r.logMinGapRatio = std::max(0.0, minLogGap);
  r.minGapRatio = std::exp(r.logMinGapRatio);

  double sumPairs = 0;
  double minLogAngle = 0;
  Matrix pair(chain.front().block.matrix.dim());
  for (std::size_t i = 1; i < n; ++i) {
    multiplyInto(chain[i].block.matrix, chain[i - 1].block.matrix, pair);
    const double pn = operatorNorm(pair);
    if (!(pn > 0.0)) throw LabError(ErrorCode::DegenerateLink, "links " + std::to_string(i - 1) + " and " + std::to_string(i) + " annihilate");
    const double logPair = chain[i].block.logScale + chain[i - 1].block.logScale + std::log(pn);
    sumPairs += logPair;
    minLogAngle = std::min(minLogAngle, logPair - logNorms[i] - logNorms[i - 1]);
  }
  r.minAngleRatio = std::min(1.0, std::exp(minLogAngle));

  ProductAccumulator total(chain.front().block.matrix.dim());
  double totalScale = 0;
  for (const auto& l : chain) {
    total.push(l.block.matrix);
    totalScale += l.block.logScale;
  }
  const double logTotal = totalScale + total.logNorm();

  double sumInner = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) sumInner += logNorms[i];
  r.residual = std::abs(logTotal + sumInner - sumPairs);
  r.bound = capC * static_cast<double>(n) * varkappa / (epsilon * epsilon);

  r.gapsMet = minLogGap > std::log(1.0 / varkappa);
  r.anglesMet = minLogAngle > std::log(epsilon);
  r.admissible = varkappa <= gateC * epsilon * epsilon;
  r.hypothesesMet = r.gapsMet && r.anglesMet && r.admissible;
  return r;
}

APReport verifyChain(std::span<const Matrix> chain, double epsilon, double varkappa, double capC, double gateC) {
  std::vector<ChainLink> links;
  links.reserve(chain.size());
  for (const auto& g : chain) links.push_back(makeLink(g));
  return verifyChain(std::span<const ChainLink>(links), epsilon, varkappa, capC, gateC);
}

std::vector<ChainLink> blockChain(const BernoulliCocycle& c, const Trajectory& t, std::size_t n0) {
  require(n0 >= 1, "block length must be positive");
  require(t.size() >= 3 * n0, "trajectory must hold at least three blocks");
  std::vector<Matrix> wedges;
  for (const auto& a : c.measure().atoms()) wedges.push_back(exteriorPower(a, 2));
  const std::size_t blocks = t.size() / n0;
  std::vector<ChainLink> chain;
  chain.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::span<const std::uint32_t> symbols(t.symbols.data() + b * n0, n0);
    ChainLink link;
    link.block = iterate(c.measure().atoms(), symbols);
    link.logWedge2 = iterate(wedges, symbols).logNorm();
    chain.push_back(std::move(link));
  }
  return chain;
}

IdentityEstimate apL1Identity(const BernoulliCocycle& c, std::size_t n0, std::size_t n1, std::size_t samples, const Rng& stream, unsigned workers) {
  require(n0 >= 1 && n1 >= 3 * n0 && n1 % n0 == 0, "need n1 a multiple of n0 with n1 >= 3 n0");
  require(samples >= 2, "need at least two samples");
  const auto logs = sampleLogNormPrefixes(c, {n0, 2 * n0, n1}, samples, 1, stream, workers);
  std::vector<double> f(samples);
  const double a = static_cast<double>(n0), b = static_cast<double>(n1);
  for (std::size_t i = 0; i < samples; ++i) f[i] = logs[i][2] / b + logs[i][0] / a - 2.0 * logs[i][1] / (2.0 * a);
  const auto e = meanEstimate(f);
  return {std::abs(e.mean), e.mean, e.stdError, samples};
}

std::vector<Matrix> generateHyperbolicChain(std::size_t n, int dim, double epsilon, double varkappa, double margin, Rng& rng) {
  require(dim == 2 || dim == 3, "chain generator supports dimensions 2 and 3");
  require(margin * epsilon < 1.0, "angle threshold must stay below 1");
  const double logMinGap = std::log(margin / varkappa);
  std::vector<Matrix> chain;
  chain.reserve(n);
  while (chain.size() < n) {
    // s1 / s2 = exp(logMinGap + spread), s2 = 1, lower values below 1.
    const double logGap = logMinGap * (1.0 + 1e-6) + rng.uniform(0.0, 3.0) * rng.uniform();
    std::vector<double> sv(static_cast<std::size_t>(dim));
    sv[0] = std::exp(logGap);
    sv[1] = 1.0;
    if (dim == 3) sv[2] = rng.uniform(0.05, 1.0);
    Matrix g = randomOrthogonal(dim, rng) * Matrix::diagonal(sv) * randomOrthogonal(dim, rng).transposed();
    g *= std::exp(rng.uniform(-2.0, 2.0));
    if (!chain.empty()) {
      const Matrix& prev = chain.back();
      const double angle = operatorNorm(g * prev) / (operatorNorm(g) * operatorNorm(prev));
      if (!(angle > margin * epsilon)) continue;
    }
    chain.push_back(std::move(g));
  }
  return chain;
}

std::vector<ChainCorpusCase> hyperbolicChainCorpus(std::size_t count, std::uint64_t seed, double margin, double gateC) {
  std::vector<ChainCorpusCase> corpus;
  corpus.reserve(count);
  const Rng root(seed);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng = root.child(k);
    ChainCorpusCase c;
    c.epsilon = rng.uniform(0.05, 0.45);
    c.varkappa = gateC * c.epsilon * c.epsilon * rng.uniform(0.01, 1.0);
    const std::size_t n = 3 + rng.below(38);
    const int dim = rng.uniform() < 0.5 ? 2 : 3;
    c.chain = generateHyperbolicChain(n, dim, c.epsilon, c.varkappa, margin, rng);
    corpus.push_back(std::move(c));
  }
  return corpus;
}

ApCalibration calibrateApConstant(std::size_t chains, std::uint64_t seed, double safety) {
  ApCalibration cal;
  cal.chains = chains;
  for (const auto& c : hyperbolicChainCorpus(chains, seed)) {
    const auto r = verifyChain(std::span<const Matrix>(c.chain), c.epsilon, c.varkappa, 1.0);
    cal.maxRatio = std::max(cal.maxRatio, r.residual / r.bound);
  }
  const double raw = cal.maxRatio * safety;
  if (raw > 0) {
    const double unit = std::pow(10.0, std::floor(std::log10(raw)) - 1.0);
    cal.capC = std::ceil(raw / unit) * unit;
  }
  return cal;
}

}  // namespace lyap
