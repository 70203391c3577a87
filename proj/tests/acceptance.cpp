// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lyap/avalanche.hpp"
#include "lyap/config.hpp"
#include "lyap/experiments.hpp"
#include "lyap/ldt.hpp"
#include "lyap/measure.hpp"
#include "lyap/multiscale.hpp"
#include "lyap/smallmat.hpp"
#include "oracles.hpp"

using namespace lyap;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

void note(Verdict& v, bool ok, const std::string& what) {
  if (!ok) {
    v.pass = false;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += what;
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::vector<double> randomWeights(std::size_t k, Rng& rng) {
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& x : w) s += (x = rng.uniform(0.05, 1.0));
  for (auto& x : w) x /= s;
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return w;
}

BernoulliCocycle hyperbolic() { return BernoulliCocycle(AtomicMeasure({Matrix{{2, 1}, {1, 1}}, Matrix{{1, 1}, {1, 2}}}, {0.5, 0.5}), true); }

Verdict exteriorIdentities() {
  Verdict v;
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    for (int d : {2, 3}) {
      const Matrix g = oracle::randomSpecialLinear(d, rng);
      const auto s = singularSpectrum(g).values;
      const auto w = singularSpectrum(exteriorPower(g, 2)).values;
      const double r1 = std::abs(w[0] - s[0] * s[1]) / (s[0] * s[1]);
      worst = std::max(worst, r1);
      if (d == 3) worst = std::max(worst, std::abs(w[1] - s[0] * s[2]) / (s[0] * s[2]));
    }
  }
  note(v, worst <= 1e-9, "max relative error " + fmt(worst));
  if (v.pass) v.detail = "max relative error " + fmt(worst);
  return v;
}

Verdict transportExactness() {
  Verdict v;
  Rng rng(1002);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t ka = 1 + rng.below(8), kb = 1 + rng.below(8);
    std::vector<double> pa(ka), pb(kb);
    for (auto& x : pa) x = rng.uniform(-3.0, 3.0);
    for (auto& x : pb) x = rng.uniform(-3.0, 3.0);
    const auto wa = randomWeights(ka, rng), wb = randomWeights(kb, rng);
    std::vector<std::pair<double, double>> oa, ob;
    for (std::size_t i = 0; i < ka; ++i) oa.push_back({pa[i], wa[i]});
    for (std::size_t i = 0; i < kb; ++i) ob.push_back({pb[i], wb[i]});
    const double w = wasserstein1(scalarMeasure(pa, wa), scalarMeasure(pb, wb)).distance;
    worst = std::max(worst, std::abs(w - oracle::cdfW1(oa, ob)));
  }
  note(v, worst <= 1e-9, "max |W1 - cdf| " + fmt(worst));
  std::size_t dualViolations = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + static_cast<int>(rng.below(2));
    auto draw = [&] {
      const std::size_t k = 1 + rng.below(8);
      std::vector<Matrix> atoms;
      for (std::size_t i = 0; i < k; ++i) atoms.push_back(oracle::gaussian(d, rng));
      return AtomicMeasure(atoms, randomWeights(k, rng));
    };
    const auto mu = draw(), nu = draw();
    if (dualLowerBound(mu, nu, 64, rng) > wasserstein1(mu, nu).distance + 1e-12) ++dualViolations;
  }
  note(v, dualViolations == 0, std::to_string(dualViolations) + " dual bounds above the primal");
  if (v.pass) v.detail = "max |W1 - cdf| " + fmt(worst) + ", 0/200 dual violations";
  return v;
}

Verdict avalancheResidual(const fs::path& configDir) {
  Verdict v;
  // Distinct from the calibration seed.
  const auto corpus = hyperbolicChainCorpus(1000, 77077);
  std::size_t within = 0, hypotheses = 0;
  double worstRatio = 0.0;
  for (const auto& c : corpus) {
    const auto r = verifyChain(std::span<const Matrix>(c.chain), c.epsilon, c.varkappa);
    hypotheses += r.hypothesesMet;
    within += r.residual <= r.bound;
    worstRatio = std::max(worstRatio, r.residual / r.bound);
  }
  note(v, hypotheses == corpus.size(), std::to_string(hypotheses) + "/1000 meet the hypotheses");
  note(v, within == corpus.size(), std::to_string(within) + "/1000 within the bound");
  double worstAligned = 0.0;
  const auto file = loadChainFile(configDir / "chains" / "aligned_diagonal.yaml");
  worstAligned = verifyChain(std::span<const Matrix>(file), 0.3, 9e-4).residual;
  Rng rng(1003);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + static_cast<int>(rng.below(2));
    std::vector<Matrix> chain;
    const std::size_t n = 3 + rng.below(38);
    for (std::size_t i = 0; i < n; ++i) {
      // Powers of two with gap ratio at least 2^11 > 1 / varkappa.
      std::vector<double> diag(static_cast<std::size_t>(d));
      int e = 20 + static_cast<int>(rng.below(20));
      for (auto& x : diag) {
        x = std::ldexp(1.0, e);
        e -= 11 + static_cast<int>(rng.below(10));
      }
      chain.push_back(Matrix::diagonal(diag));
    }
    const auto r = verifyChain(std::span<const Matrix>(chain), 0.3, 9e-4);
    note(v, r.hypothesesMet, "aligned chain misses the hypotheses");
    worstAligned = std::max(worstAligned, r.residual);
  }
  note(v, worstAligned <= 1e-10, "aligned residual " + fmt(worstAligned));
  if (v.pass) v.detail = "1000/1000 within C n varkappa / eps^2 (max ratio " + fmt(worstRatio) + "), aligned residual " + fmt(worstAligned);
  return v;
}

Verdict baseLdt() {
  Verdict v;
  const BernoulliCocycle coin(AtomicMeasure({Matrix{{2, 0}, {0, 0.5}}, Matrix{{0.5, 0}, {0, 2}}}, {0.5, 0.5}));
  const Observable heads = [](const Matrix& g) { return g(0, 0) > 1.0 ? 1.0 : 0.0; };
  const std::size_t samples = 100000;
  DeviationOptions opt;
  opt.workers = 4;
  const auto curve = baseDeviation(coin, heads, 0.1, {25, 50, 100, 200, 400}, samples, Rng(1004), opt);
  double worstZ = 0.0;
  for (const auto& p : curve.points) {
    const int n = static_cast<int>(p.scale);
    const double exact = oracle::binomialExpectation(n, 0.5, [n](int k) { return 5 * std::abs(2 * k - n) > n ? 1.0 : 0.0; });
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
    const double z = se > 0.0 ? std::abs(p.pHat - exact) / se : (p.pHat == exact ? 0.0 : INFINITY);
    worstZ = std::max(worstZ, z);
    note(v, z < 4.0, "n=" + std::to_string(n) + " off by " + fmt(z) + " se");
  }
  const double cramer = oracle::cramerFairCoin(0.1);
  note(v, curve.fittedRate.has_value(), "no fitted rate");
  const double rate = curve.fittedRate.value_or(0.0);
  note(v, std::abs(rate - cramer) <= 0.25 * cramer, "rate " + fmt(rate) + " vs Cramer " + fmt(cramer));
  if (v.pass) v.detail = "rate " + fmt(rate) + " vs Cramer " + fmt(cramer) + ", max " + fmt(worstZ) + " se";
  return v;
}

Verdict fiberLdt() {
  Verdict v;
  const BernoulliCocycle walk(AtomicMeasure({Matrix::diagonal({M_E, 1.0 / M_E}), Matrix::diagonal({1.0 / M_E, M_E})}, {0.5, 0.5}));
  const std::size_t samples = 100000;
  const double eps = 0.3;
  DeviationOptions opt;
  opt.workers = 4;
  const auto curve = fiberDeviation(walk, eps, {5, 10, 15, 20, 25, 30}, samples, Rng(1005), opt);
  double worstZ = 0.0;
  for (const auto& p : curve.points) {
    const int n = static_cast<int>(p.scale);
    const double l = oracle::commutingFiniteScale(n, 0.5, 1.0, -1.0);
    const double exact = oracle::binomialExpectation(n, 0.5, [&](int k) { return std::abs(std::abs(2.0 * k - n) / n - l) > eps ? 1.0 : 0.0; });
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(samples));
    const double z = std::abs(p.pHat - exact) / se;
    worstZ = std::max(worstZ, z);
    note(v, z < 4.0, "n=" + std::to_string(n) + " off by " + fmt(z) + " se");
  }
  note(v, curve.fittedRate && *curve.fittedRate > 0.0, "fitted rate not positive");
  if (v.pass) v.detail = "max " + fmt(worstZ) + " se, c = " + fmt(*curve.fittedRate);
  return v;
}

Verdict inductiveStep() {
  Verdict v;
  const auto id = apL1Identity(hyperbolic(), 50, 500, 100000, Rng(1006), 4);
  const double bound = kInductiveConstant / 10.0 + 3.0 * id.stdError;
  note(v, id.value <= bound, "identity " + fmt(id.value) + " > " + fmt(bound));

  Rng rng(1007);
  std::size_t accepted = 0, violations = 0, mismatches = 0;
  while (accepted < 1000) {
    ScheduleParams p;
    p.epsilon = rng.uniform(0.001, 0.04);
    p.n0 = 2 + rng.below(4999);
    p.rate = std::pow(10.0, rng.uniform(-3.0, 0.0));
    p.exponentDeficit = rng.uniform(0.01, 0.49);
    p.eta0 = rng.uniform(0.0, 3.0 * p.epsilon);
    p.theta0 = rng.uniform(0.0, p.epsilon);
    p.kappa = 2.0 * p.theta0 + 4.0 * p.eta0 + 12.0 * p.epsilon + rng.uniform(0.01, 1.0);
    p.steps = 1 + rng.below(8);
    p.cap = 1000000000000000000ULL;
    const auto s = scheduleScales(p);
    if (s.budgets.size() < 2 || s.budgets[1].n >= p.cap) continue;
    if (p.c2 * static_cast<double>(p.n0) / static_cast<double>(s.budgets[1].n) >= p.epsilon) continue;
    ++accepted;
    // Independent replay of the budget recursion on the scheduled scales,
    // eta_{k+1} = C2 (n_k / n_{k+1}); compared bitwise.
    double eta = p.eta0, theta = p.theta0;
    for (std::size_t k = 0; k < s.budgets.size(); ++k) {
      const auto& b = s.budgets[k];
      if (b.n >= p.cap) break;
      if (b.eta != eta || b.theta != theta) ++mismatches;
      if (!(theta < 23.0 * p.epsilon)) ++violations;
      if (k + 1 == s.budgets.size()) break;
      const double eta1 = p.c2 * (static_cast<double>(b.n) / static_cast<double>(s.budgets[k + 1].n));
      theta = theta + 4.0 * eta + eta1;
      eta = eta1;
    }
  }
  note(v, violations == 0, std::to_string(violations) + " budgets with theta >= 23 eps");
  note(v, mismatches == 0, std::to_string(mismatches) + " budgets differ from the replayed recursion");
  if (v.pass) v.detail = "identity " + fmt(id.value) + " <= " + fmt(bound) + ", theta < 23 eps on 1000/1000 schedules";
  return v;
}

Verdict holderCommuting() {
  Verdict v;
  const BernoulliCocycle c(AtomicMeasure({Matrix::diagonal({M_E, 1.0 / M_E}), Matrix::diagonal({std::exp(-0.5), std::exp(0.5)})}, {0.7, 0.3}));
  std::string exps;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fit = holderExperiment(c, {0.16, 0.08, 0.04, 0.02, 0.01}, 2, 1000, 400, Rng(seed), 4);
    const double a = fit.exponent.value_or(NAN);
    exps += (exps.empty() ? "" : " ") + fmt(a);
    note(v, fit.exponent && std::abs(a - 1.0) <= 0.15, "seed " + std::to_string(seed) + " alpha " + fmt(a));
  }
  if (v.pass) v.detail = "alpha = " + exps;
  return v;
}

Verdict schrodinger() {
  Verdict v;
  std::vector<double> energies;
  for (int i = -16; i <= 16; ++i) energies.push_back(0.25 * i);
  const auto rows = schrodingerSweep({0.0}, {1.0}, energies, 4096, 1000, Rng(1008), 4);
  double worst = 0.0;
  for (const auto& r : rows) {
    const double dev = std::abs(r.estimate - freeFieldExponent(r.energy));
    const double z = r.sigma > 0.0 ? dev / r.sigma : (dev == 0.0 ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    note(v, dev <= 3.0 * r.sigma, "E=" + fmt(r.energy) + " off by " + fmt(z) + " sigma");
  }
  const auto anderson = schrodingerSweep({-1.0, 1.0}, {0.5, 0.5}, {0.0}, 4096, 1000, Rng(1009), 4);
  const double ratio = anderson[0].estimate / anderson[0].sigma;
  note(v, ratio > 5.0, "Anderson E=0 at " + fmt(ratio) + " sigma");
  if (v.pass) v.detail = "33 energies within " + fmt(worst) + " sigma, Anderson E=0 L = " + fmt(anderson[0].estimate) + " at " + fmt(ratio) + " sigma";
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict reproducibility(const fs::path& configDir, const fs::path& scratch) {
  Verdict v;
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(configDir))
    if (e.path().extension() == ".yaml") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  std::size_t files = 0;
  std::vector<std::string> seen;
  for (const auto& cfg : configs) {
    const auto config = loadConfig(cfg);
    seen.push_back(config.experiment);
    std::vector<RunResult> runs;
    for (unsigned w : {1u, 4u}) {
      RunOverrides o;
      o.workers = w;
      o.outputDir = scratch / (cfg.stem().string() + "_w" + std::to_string(w));
      fs::remove_all(*o.outputDir);
      runs.push_back(runExperiment(config, o));
    }
    note(v, runs[0].files.size() == runs[1].files.size() && !runs[0].files.empty(), cfg.stem().string() + " file lists differ");
    for (std::size_t i = 0; i < std::min(runs[0].files.size(), runs[1].files.size()); ++i) {
      ++files;
      note(v, runs[0].files[i].filename() == runs[1].files[i].filename() && slurp(runs[0].files[i]) == slurp(runs[1].files[i]),
           cfg.stem().string() + "/" + runs[0].files[i].filename().string() + " differs");
    }
  }
  for (const auto& name : experimentNames()) note(v, std::find(seen.begin(), seen.end(), name) != seen.end(), "no config runs " + name);
  if (v.pass) v.detail = std::to_string(files) + " files identical across " + std::to_string(configs.size()) + " configs";
  return v;
}

}  // namespace

int main() {
  const fs::path configDir = LYAP_CONFIG_DIR;
  const fs::path scratch = LYAP_ACCEPTANCE_SCRATCH;
  fs::create_directories(scratch);
  struct Criterion {
    const char* name;
    double budgetSeconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"exterior-power identities", 1.0, exteriorIdentities},
      {"W1 exactness", 10.0, transportExactness},
      {"avalanche residual", 30.0, [&] { return avalancheResidual(configDir); }},
      {"base LDT vs Cramer", 120.0, baseLdt},
      {"fiber LDT commuting walk", 120.0, fiberLdt},
      {"inductive step and budgets", 300.0, inductiveStep},
      {"Holder exponent commuting", 300.0, holderCommuting},
      {"Schrodinger free field and Anderson", 300.0, schrodinger},
      {"reproducibility across workers", 1e9, [&] { return reproducibility(configDir, scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budgetSeconds) note(v, false, "runtime " + fmt(secs) + " s over " + fmt(c.budgetSeconds) + " s");
    failures += !v.pass;
    std::printf("%s %zu %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, c.name, secs, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
