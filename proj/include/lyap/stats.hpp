#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace lyap {

struct MeanEstimate {
  double mean = 0.0;
  double stdError = 0.0;
  std::size_t count = 0;
};

/// Sample mean with standard error sd / sqrt(n), summed in index order.
inline MeanEstimate meanEstimate(std::span<const double> xs) {
  MeanEstimate e;
  e.count = xs.size();
  if (xs.empty()) return e;
  double sum = 0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.stdError = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return e;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slopeStdError = 0.0;
  double rSquared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y ~ intercept + slope * x.
inline LinearFit fitLine(std::span<const double> x, std::span<const double> y) {
  LinearFit f;
  const std::size_t n = x.size();
  f.points = n;
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.rSquared = syy > 0 ? 1.0 - ssr / syy : 1.0;
  if (n > 2) f.slopeStdError = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return f;
}

}  // namespace lyap
