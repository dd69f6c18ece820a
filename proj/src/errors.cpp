#include "swingest/errors.hpp"

namespace swingest {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::SingularInteriorBlock: return "SingularInteriorBlock";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveDamping: return "NonpositiveDamping";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateNode: return "DegenerateNode";
    case ErrorCode::ExtractionUnstable: return "ExtractionUnstable";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::InsufficientTrials: return "InsufficientTrials";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidTopology:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonpositiveDamping:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InsufficientTrials:
      return 1;
    case ErrorCode::IoError:
      return 3;
    default:
      return 2;
  }
}

}  // namespace swingest
