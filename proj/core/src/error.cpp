#include "condensate/error.hpp"

namespace condensate {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonpositiveLength: return "NonpositiveLength";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::InvalidKernelParams: return "InvalidKernelParams";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::StencilOutOfRange: return "StencilOutOfRange";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DegenerateFunctional: return "DegenerateFunctional";
    case ErrorCode::NegativeU: return "NegativeU";
    case ErrorCode::InvalidCondition: return "InvalidCondition";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyUList: return "EmptyUList";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace condensate
