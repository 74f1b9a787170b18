#pragma once

#include <stdexcept>
#include <string>

namespace cdlab {

enum class ErrorCode {
  InvalidArgument,
  AlgebraMismatch,
  NotHermitian,
  CapExceeded,
  HypothesisViolation,
  ResolventDoesNotExist,
  UnsupportedStructure,
  RankAmbiguity,
  NotImplementable,
  Schema,
};

const char* to_string(ErrorCode code);

/// Error raised by every library operation whose precondition fails.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cdlab
