#include "seafl/common/error.hpp"

namespace seafl {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPoint: return "InvalidPoint";
    case ErrorCode::kInvalidScalar: return "InvalidScalar";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kInsufficientShares: return "InsufficientShares";
    case ErrorCode::kDuplicateIndex: return "DuplicateIndex";
    case ErrorCode::kReplayedIteration: return "ReplayedIteration";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kBadSignature: return "BadSignature";
    case ErrorCode::kBelowThreshold: return "BelowThreshold";
    case ErrorCode::kListMismatch: return "ListMismatch";
    case ErrorCode::kBadNodeSignature: return "BadNodeSignature";
    case ErrorCode::kMissingNodeMessage: return "MissingNodeMessage";
    case ErrorCode::kConflictingUpdate: return "ConflictingUpdate";
    case ErrorCode::kMalformedFrame: return "MalformedFrame";
    case ErrorCode::kFrameTooLarge: return "FrameTooLarge";
    case ErrorCode::kConnectionClosed: return "ConnectionClosed";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUsageError: return "UsageError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace seafl
