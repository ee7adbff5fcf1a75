#include "tpz/error.hpp"

namespace tpz {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::DuplicatePoles: return "DuplicatePoles";
    case ErrorCode::PoleOutOfDomain: return "PoleOutOfDomain";
    case ErrorCode::ZeroLeadingResidue: return "ZeroLeadingResidue";
    case ErrorCode::SharpShapeMismatch: return "SharpShapeMismatch";
    case ErrorCode::OuternessCheckFailed: return "OuternessCheckFailed";
    case ErrorCode::FactorizationMismatch: return "FactorizationMismatch";
    case ErrorCode::EvaluationAtPole: return "EvaluationAtPole";
    case ErrorCode::SingularHInverse: return "SingularHInverse";
    case ErrorCode::SingularLeadingCoefficient: return "SingularLeadingCoefficient";
    case ErrorCode::DivergentRecursion: return "DivergentRecursion";
    case ErrorCode::ToleranceUnreachable: return "ToleranceUnreachable";
    case ErrorCode::ContourTooTight: return "ContourTooTight";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::ResolventSingular: return "ResolventSingular";
    case ErrorCode::RegionUncovered: return "RegionUncovered";
    case ErrorCode::RegionGap: return "RegionGap";
    case ErrorCode::NumericallySingular: return "NumericallySingular";
    case ErrorCode::RecursionBreakdown: return "RecursionBreakdown";
    case ErrorCode::NonSummableRHS: return "NonSummableRHS";
    case ErrorCode::ConsistencyViolation: return "ConsistencyViolation";
    case ErrorCode::DenseCapExceeded: return "DenseCapExceeded";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedSpec:
    case ErrorCode::DuplicatePoles:
    case ErrorCode::PoleOutOfDomain:
    case ErrorCode::ZeroLeadingResidue:
    case ErrorCode::SharpShapeMismatch:
    case ErrorCode::OuternessCheckFailed:
    case ErrorCode::FactorizationMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace tpz
