// Test-side oracles. Nothing here calls into the library's estimators.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "lyap/rng.hpp"
#include "lyap/smallmat.hpp"

namespace oracle {

inline lyap::Matrix gaussian(int d, lyap::Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(d * d));
  for (auto& x : v) x = rng.normal();
  return lyap::Matrix(d, v);
}

/// Gaussian matrix rescaled onto SL(d, R).
inline lyap::Matrix randomSpecialLinear(int d, lyap::Rng& rng) {
  for (;;) {
    lyap::Matrix g = gaussian(d, rng);
    double det = g.determinant();
    if (std::abs(det) < 1e-3) continue;
    if (det < 0) {
      for (int j = 0; j < d; ++j) g(0, j) = -g(0, j);
      det = -det;
    }
    g *= std::pow(det, -1.0 / d);
    return g;
  }
}

/// Singular values of a 2x2 matrix from the eigenvalues of g^T g.
inline std::pair<double, double> singular2(double a, double b, double c, double d) {
  const double p = a * a + b * b + c * c + d * d;
  const double q = std::abs(a * d - b * c);
  const double disc = std::sqrt(std::max(0.0, p * p / 4.0 - q * q));
  const double s1 = std::sqrt(p / 2.0 + disc);
  return {s1, s1 > 0 ? q / s1 : 0.0};
}

/// W1 between point masses on the line: integral of |F - G|.
inline double cdfW1(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b) {
  std::vector<std::pair<double, double>> ev;
  for (auto& [x, w] : a) ev.push_back({x, w});
  for (auto& [x, w] : b) ev.push_back({x, -w});
  std::sort(ev.begin(), ev.end());
  double acc = 0.0, diff = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    diff += ev[i].second;
    acc += std::abs(diff) * (ev[i + 1].first - ev[i].first);
  }
  return acc;
}

inline double logChoose(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

inline double binomialPmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(logChoose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// E f(k) for k ~ Binomial(n, p).
template <class F>
double binomialExpectation(int n, double p, F f) {
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) acc += binomialPmf(n, k, p) * f(k);
  return acc;
}

/// Commuting walk: k steps of size up, n - k of size down, k ~ Binomial(n, p).
/// Returns E |S_n| / n = L1^(n) of diag(e^up, e^-up) / diag(e^down, e^-down).
inline double commutingFiniteScale(int n, double p, double up, double down) {
  return binomialExpectation(n, p, [&](int k) { return std::abs(k * up + (n - k) * down); }) / n;
}

/// Cramer rate of a Bernoulli(1/2) average at level 1/2 + eps.
inline double cramerFairCoin(double eps) {
  const double x = 0.5 + eps;
  return x * std::log(2.0 * x) + (1.0 - x) * std::log(2.0 * (1.0 - x));
}

}  // namespace oracle
