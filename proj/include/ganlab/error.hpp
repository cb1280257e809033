#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ganlab {

enum class ErrorCode {
  NonConvergence,
  InvalidFunction,
  Singular,
  DomainError,
  EmptySample,
  InvalidParams,
  DegenerateSample,
  UnknownModel,
  ShapeMismatch,
  DivergenceDetected,
  StationarityViolated,
  MeanNotZero,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` tells callers which
/// failure mode occurred.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ganlab
