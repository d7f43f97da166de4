#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wpath {

enum class ErrorCode {
  RankDeficient,
  NonFinite,
  NoConvergence,
  Overflow,
  ZeroVector,
  NonInterior,
  StepTooLarge,
  ContractFailure,
  IterationLimit,
  RollbackLoop,
  InitializationFailure,
  AmbiguousActiveSet,
  ParseError,
  DimensionMismatch,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace wpath
