#pragma once

#include <stdexcept>
#include <string>

namespace lyap {

enum class ErrorCode {
  ContractViolation,
  NormUnderflow,
  ObservableOverflow,
  PerturbationInfeasible,
  RankCollapse,
  MinusInfinityExponent,
  DegenerateLink,
  UnsupportedDimension,
  Config,
};

const char* toString(ErrorCode code);

/// Error raised by every module of the library. The code identifies the
/// failure class; the message carries the details.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw LabError(ErrorCode::ContractViolation, what);
}

}  // namespace lyap
