#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmot {

enum class ErrorCode {
  NonNormalized,
  NegativeWeight,
  EmptySupport,
  AxisOutOfRange,
  HeterogeneousSupports,
  MapOutOfRange,
  DimensionMismatch,
  BaseMismatch,
  NonUniformWeights,
  MarginalMismatch,
  InfeasibleMarginals,
  SizeCapExceeded,
  NonSquare,
  NotExactSolve,
  NotQuadraticCost,
  CapExceeded,
  IndexOutOfRange,
  DegenerateField,
  EmptySample,
  GridMismatch,
  NonSquareGrid,
  NonFinite,
  InvalidArgument,
  InputError,
};

std::string_view to_string(ErrorCode code);

// All toolkit failures are reported through this type; `code()` lets callers
// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mmot
