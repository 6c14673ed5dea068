#include "monoflow/error.hpp"

namespace monoflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kNotMonotone: return "NOT_MONOTONE";
    case ErrorCode::kInnerNonconverged: return "INNER_NONCONVERGED";
    case ErrorCode::kStationary: return "STATIONARY";
    case ErrorCode::kBracketOverflow: return "BRACKET_OVERFLOW";
    case ErrorCode::kUnknownSolution: return "UNKNOWN_SOLUTION";
    case ErrorCode::kDomainUnbounded: return "DOMAIN_UNBOUNDED";
    case ErrorCode::kNotInDomain: return "NOT_IN_DOMAIN";
    case ErrorCode::kUnsupported: return "UNSUPPORTED";
    case ErrorCode::kInsufficientPoints: return "INSUFFICIENT_POINTS";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kOracleFailed: return "ORACLE_FAILED";
    case ErrorCode::kCertViolated: return "CERT_VIOLATED";
    case ErrorCode::kSurrogateNonmonotone: return "SURROGATE_NONMONOTONE";
    case ErrorCode::kWindowUnreachable: return "WINDOW_UNREACHABLE";
    case ErrorCode::kConfig: return "CONFIG";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace monoflow
