#include "kasner/error.hpp"

namespace kasner {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::PoleError: return "PoleError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::IntegerOrderUnsupported: return "IntegerOrderUnsupported";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::MaxDepthExceeded: return "MaxDepthExceeded";
    case ErrorCode::IntegrandSingular: return "IntegrandSingular";
    case ErrorCode::WrongClass: return "WrongClass";
    case ErrorCode::DegenerateWronskian: return "DegenerateWronskian";
    case ErrorCode::DomainLimit: return "DomainLimit";
    case ErrorCode::ComplexInput: return "ComplexInput";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::IllConditionedFit: return "IllConditionedFit";
    case ErrorCode::ZeroMomentum: return "ZeroMomentum";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::BadOrdering: return "BadOrdering";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace kasner
