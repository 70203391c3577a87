#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lyap {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hashLabel(std::string_view label);

/// Seeded random stream. A stream is identified by its key; child streams
/// are derived from (key, label) without touching the parent's state, which
/// is what makes Monte Carlo results independent of the worker count.
class Rng {
 public:
  explicit Rng(std::uint64_t key = 0) : key_(key), engine_(splitmix64(key)) {}

  std::uint64_t key() const noexcept { return key_; }

  Rng child(std::uint64_t label) const { return Rng(splitmix64(key_ ^ splitmix64(label + 0x632be59bd9b4e019ULL))); }
  Rng child(std::string_view label) const { return child(hashLabel(label)); }

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_); }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{};
};

}  // namespace lyap
