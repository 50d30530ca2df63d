#include "logifold/error.hpp"

namespace logifold {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::MultipleSources: return "MultipleSources";
    case ErrorCode::IncompleteRouting: return "IncompleteRouting";
    case ErrorCode::DanglingVertex: return "DanglingVertex";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownSignVector: return "UnknownSignVector";
    case ErrorCode::UnsupportedActivation: return "UnsupportedActivation";
    case ErrorCode::NotF2Labeled: return "NotF2Labeled";
    case ErrorCode::LabelEncoding: return "LabelEncoding";
    case ErrorCode::SeparationFailure: return "SeparationFailure";
    case ErrorCode::AmbiguousFiber: return "AmbiguousFiber";
    case ErrorCode::StateSpaceViolation: return "StateSpaceViolation";
    case ErrorCode::StateSpaceMismatch: return "StateSpaceMismatch";
    case ErrorCode::NotScalarOutput: return "NotScalarOutput";
    case ErrorCode::UnknownOutcome: return "UnknownOutcome";
    case ErrorCode::BlockMismatch: return "BlockMismatch";
    case ErrorCode::FlatteningMismatch: return "FlatteningMismatch";
    case ErrorCode::NoRootModel: return "NoRootModel";
    case ErrorCode::AssumptionViolation: return "AssumptionViolation";
    case ErrorCode::NoValidPath: return "NoValidPath";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::UncoveredInstance: return "UncoveredInstance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::PathExplosion: return "PathExplosion";
    case ErrorCode::GuardExplosion: return "GuardExplosion";
    case ErrorCode::RegionExplosion: return "RegionExplosion";
    case ErrorCode::DimensionBudgetExceeded: return "DimensionBudgetExceeded";
    case ErrorCode::BudgetCap: return "BudgetCap";
    case ErrorCode::MalformedFile: return "MalformedFile";
  }
  return "Unknown";
}

bool is_cap_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::PathExplosion:
    case ErrorCode::GuardExplosion:
    case ErrorCode::RegionExplosion:
    case ErrorCode::DimensionBudgetExceeded:
    case ErrorCode::BudgetCap:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace logifold
