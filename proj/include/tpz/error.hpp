#pragma once

#include <stdexcept>
#include <string>

namespace tpz {

enum class ErrorCode {
  MalformedSpec,
  DuplicatePoles,
  PoleOutOfDomain,
  ZeroLeadingResidue,
  SharpShapeMismatch,
  OuternessCheckFailed,
  FactorizationMismatch,
  EvaluationAtPole,
  SingularHInverse,
  SingularLeadingCoefficient,
  DivergentRecursion,
  ToleranceUnreachable,
  ContourTooTight,
  QuadratureNotConverged,
  DomainViolation,
  NotApplicable,
  ResolventSingular,
  RegionUncovered,
  RegionGap,
  NumericallySingular,
  RecursionBreakdown,
  NonSummableRHS,
  ConsistencyViolation,
  DenseCapExceeded,
  Io,
};

const char* to_string(ErrorCode code);

/// True for codes that describe a bad symbol specification rather than a
/// numerical failure downstream.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tpz
