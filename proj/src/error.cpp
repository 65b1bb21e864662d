#include "prodval/error.hpp"

namespace prodval {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ProbabilityMass: return "ProbabilityMass";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DateGap: return "DateGap";
    case ErrorCode::LeafNotAtHorizon: return "LeafNotAtHorizon";
    case ErrorCode::MissingInteriorDate: return "MissingInteriorDate";
    case ErrorCode::DateNotInGrid: return "DateNotInGrid";
    case ErrorCode::ProcessUndefinedAtDate: return "ProcessUndefinedAtDate";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidTradable: return "InvalidTradable";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NodeOutsideSpan: return "NodeOutsideSpan";
    case ErrorCode::UnderlyingHasInflows: return "UnderlyingHasInflows";
    case ErrorCode::StopNotAntichain: return "StopNotAntichain";
    case ErrorCode::CloseOutUnavailable: return "CloseOutUnavailable";
    case ErrorCode::BadLevel: return "BadLevel";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::NegativePayoffAtom: return "NegativePayoffAtom";
    case ErrorCode::MissingCertificate: return "MissingCertificate";
    case ErrorCode::MissingRate: return "MissingRate";
    case ErrorCode::MissingCost: return "MissingCost";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::InfeasibleFamily: return "InfeasibleFamily";
    case ErrorCode::BisectionNoBracket: return "BisectionNoBracket";
    case ErrorCode::InfeasibleAtNode: return "InfeasibleAtNode";
    case ErrorCode::NeutralityAuditFailed: return "NeutralityAuditFailed";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NoBondAvailable: return "NoBondAvailable";
    case ErrorCode::FixedPointDivergence: return "FixedPointDivergence";
    case ErrorCode::HomogeneityAuditFailed: return "HomogeneityAuditFailed";
    case ErrorCode::BadRate: return "BadRate";
    case ErrorCode::MassOutsideM1: return "MassOutsideM1";
    case ErrorCode::InteriorFlowsPresent: return "InteriorFlowsPresent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::CrossRefError: return "CrossRefError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace prodval
