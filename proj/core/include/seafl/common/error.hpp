#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seafl {

// Every failure surfaced by the library carries one of these codes. The CLI
// prints the code name on stderr so scripts can match on it.
enum class ErrorCode {
  kInvalidPoint,
  kInvalidScalar,
  kAuthFailure,
  kLengthMismatch,
  kEmptyList,
  kInvalidThreshold,
  kInsufficientShares,
  kDuplicateIndex,
  kReplayedIteration,
  kUnknownUser,
  kUnknownNode,
  kBadSignature,
  kBelowThreshold,
  kListMismatch,
  kBadNodeSignature,
  kMissingNodeMessage,
  kConflictingUpdate,
  kMalformedFrame,
  kFrameTooLarge,
  kConnectionClosed,
  kTimeout,
  kInvalidK,
  kInvalidConfig,
  kUsageError,
  kIoError,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace seafl
