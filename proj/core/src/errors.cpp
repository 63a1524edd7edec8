#include "lvlingam/errors.hpp"

namespace lvlingam {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInput: return "input";
    case ErrorCode::kUnsupportedOrder: return "unsupported-order";
    case ErrorCode::kInsufficientSample: return "insufficient-sample";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kNearSingular: return "near-singular";
    case ErrorCode::kNoRealRoot: return "no-real-root";
    case ErrorCode::kNoValidCandidate: return "no-valid-candidate";
    case ErrorCode::kDegenerateRatio: return "degenerate-ratio";
    case ErrorCode::kIllConditionedAdjustment: return "ill-conditioned-adjustment";
    case ErrorCode::kConstraintInfeasible: return "constraint-infeasible";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kUndefinedMetric: return "undefined-metric";
    case ErrorCode::kRankDeficient: return "rank-deficient";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool is_estimation_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateInput:
    case ErrorCode::kNearSingular:
    case ErrorCode::kNoRealRoot:
    case ErrorCode::kNoValidCandidate:
    case ErrorCode::kDegenerateRatio:
    case ErrorCode::kIllConditionedAdjustment:
    case ErrorCode::kConstraintInfeasible:
    case ErrorCode::kInsufficientSample:
    case ErrorCode::kUndefinedMetric:
      return true;
    default:
      return false;
  }
}

}  // namespace lvlingam
