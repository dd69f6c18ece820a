#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swingest {

enum class ErrorCode {
  InvalidTopology,
  SingularInteriorBlock,
  DimensionMismatch,
  NonpositiveDamping,
  RankDeficient,
  DegenerateNode,
  ExtractionUnstable,
  ZeroTruth,
  NotPSD,
  InsufficientTrials,
  InvalidArgument,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a failure of this kind:
// 1 validation/parse, 2 numerical failure, 3 IO.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace swingest
