#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lvlingam {

enum class ErrorCode {
  kInput,
  kUnsupportedOrder,
  kInsufficientSample,
  kUnsupported,
  kDegenerateInput,
  kNearSingular,
  kNoRealRoot,
  kNoValidCandidate,
  kDegenerateRatio,
  kIllConditionedAdjustment,
  kConstraintInfeasible,
  kPrecondition,
  kUndefinedMetric,
  kRankDeficient,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. Estimation failures at small sample
/// sizes are expected and carry a code so callers can tabulate them.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for codes that signal non-generic or noise-dominated data rather than
/// a malformed call.
bool is_estimation_failure(ErrorCode code);

}  // namespace lvlingam
