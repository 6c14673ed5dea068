#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace monoflow {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotMonotone,
  kInnerNonconverged,
  kStationary,
  kBracketOverflow,
  kUnknownSolution,
  kDomainUnbounded,
  kNotInDomain,
  kUnsupported,
  kInsufficientPoints,
  kEmptyInput,
  kOracleFailed,
  kCertViolated,
  kSurrogateNonmonotone,
  kWindowUnreachable,
  kConfig,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception; `code()` lets
// callers distinguish benign outcomes (kStationary) from genuine faults.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace monoflow
