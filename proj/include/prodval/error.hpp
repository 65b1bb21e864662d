#pragma once

#include <stdexcept>
#include <string>

namespace prodval {

enum class ErrorCode {
  ProbabilityMass,
  OrphanNode,
  DuplicateNode,
  DateGap,
  LeafNotAtHorizon,
  MissingInteriorDate,
  DateNotInGrid,
  ProcessUndefinedAtDate,
  InvalidDistribution,
  DimensionMismatch,
  InvalidTradable,
  NumericalFailure,
  NodeOutsideSpan,
  UnderlyingHasInflows,
  StopNotAntichain,
  CloseOutUnavailable,
  BadLevel,
  EmptyDistribution,
  NegativePayoffAtom,
  MissingCertificate,
  MissingRate,
  MissingCost,
  SpanMismatch,
  InfeasibleFamily,
  BisectionNoBracket,
  InfeasibleAtNode,
  NeutralityAuditFailed,
  ValidationFailed,
  NoBondAvailable,
  FixedPointDivergence,
  HomogeneityAuditFailed,
  BadRate,
  MassOutsideM1,
  InteriorFlowsPresent,
  ParseError,
  SchemaViolation,
  CrossRefError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace prodval
