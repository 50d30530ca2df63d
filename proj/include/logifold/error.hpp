#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logifold {

/// Every failure the library reports carries one of these codes.
enum class ErrorCode {
  // structural / validation
  CyclicGraph,
  MultipleSources,
  IncompleteRouting,
  DanglingVertex,
  DimensionMismatch,
  UnknownSignVector,
  UnsupportedActivation,
  NotF2Labeled,
  LabelEncoding,
  SeparationFailure,
  AmbiguousFiber,
  StateSpaceViolation,
  StateSpaceMismatch,
  NotScalarOutput,
  UnknownOutcome,
  BlockMismatch,
  FlatteningMismatch,
  NoRootModel,
  AssumptionViolation,
  NoValidPath,
  EmptyValidation,
  UncoveredInstance,
  InvalidArgument,
  DivergenceDetected,
  // caps and budgets
  PathExplosion,
  GuardExplosion,
  RegionExplosion,
  DimensionBudgetExceeded,
  BudgetCap,
  // persistence
  MalformedFile,
};

std::string_view to_string(ErrorCode code);

/// True for the errors raised when a configured cap or budget is exceeded.
bool is_cap_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace logifold
