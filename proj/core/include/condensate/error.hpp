#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace condensate {

enum class ErrorCode {
  NonpositiveLength,
  TooFewPoints,
  LengthMismatch,
  EmptyVector,
  InvalidKernelParams,
  NotPositive,
  OutOfDomain,
  StencilOutOfRange,
  UnsupportedOrder,
  GridMismatch,
  DegenerateFunctional,
  NegativeU,
  InvalidCondition,
  ZeroVector,
  EmptyUList,
  InvalidSpec,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this exception; code() is stable, what() is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace condensate
