#include "collective/error.hpp"

namespace collective {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonMonotoneWeight: return "NonMonotoneWeight";
    case ErrorCode::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case ErrorCode::InvalidBudget: return "InvalidBudget";
    case ErrorCode::EllipticityViolation: return "EllipticityViolation";
    case ErrorCode::SplitInfeasible: return "SplitInfeasible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::LevelOverflow: return "LevelOverflow";
    case ErrorCode::NotLowerSet: return "NotLowerSet";
    case ErrorCode::OrderingInvalid: return "OrderingInvalid";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::CountOverflow: return "CountOverflow";
    case ErrorCode::QuadBudgetExceeded: return "QuadBudgetExceeded";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace collective
