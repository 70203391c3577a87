#include "lyap/rng.hpp"

#include "lyap/error.hpp"

namespace lyap {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t hashLabel(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::ContractViolation: return "contract violation";
    case ErrorCode::NormUnderflow: return "norm underflow";
    case ErrorCode::ObservableOverflow: return "observable overflow";
    case ErrorCode::PerturbationInfeasible: return "perturbation infeasible";
    case ErrorCode::RankCollapse: return "rank collapse";
    case ErrorCode::MinusInfinityExponent: return "minus infinity exponent";
    case ErrorCode::DegenerateLink: return "degenerate link";
    case ErrorCode::UnsupportedDimension: return "unsupported dimension";
    case ErrorCode::Config: return "config error";
  }
  return "unknown error";
}

}  // namespace lyap
