#pragma once

#include <stdexcept>
#include <string>

namespace bopnn {

// Stable failure categories. The C API maps these one-to-one onto
// bopnn_status codes, so values must not be reordered.
enum class ErrorCode {
  kInvalidArgument = 1,
  kNotPositiveDefinite = 2,
  kConvergenceFailure = 3,
  kDegenerateInput = 4,
  kInsufficientPoints = 5,
  kSingleClassSample = 6,
  kEmptyEnsemble = 7,
  kProjectionDisabled = 8,
  kIndexOutOfRange = 9,
  kParseError = 10,
  kMissingValue = 11,
  kUnknownTarget = 12,
  kSchemaMismatch = 13,
  kTooSmall = 14,
  kVersionMismatch = 15,
  kCorruptFile = 16,
  kNoOobPoints = 17,
  kIoError = 18,
  kInternal = 19,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace bopnn
