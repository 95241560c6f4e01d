#include "tajweed/error.hpp"

namespace tajweed {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::WrongRate: return "WrongRate";
    case ErrorCode::DegenerateBank: return "DegenerateBank";
    case ErrorCode::TooFewVectors: return "TooFewVectors";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::EmptyNegatives: return "EmptyNegatives";
    case ErrorCode::MissingModel: return "MissingModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::StratumTooSmall: return "StratumTooSmall";
    case ErrorCode::MissingStratum: return "MissingStratum";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownRecord: return "UnknownRecord";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace tajweed
