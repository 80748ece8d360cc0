#pragma once

#include <stdexcept>
#include <string>

namespace kvbench {

enum class ErrorCode {
  kInvalidParameter,
  kConnectTimeout,
  kConnectRefused,
  kAuthFailure,
  kResolveFailure,
  kConnectionReset,
  kProtocolDesync,
  kInfoUnavailable,
  kNoData,
  kInvalidBaseline,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

// a refused connection from an auth failure without parsing text.
// e.g. a refused connection from an auth failure without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void invalid_parameter(const std::string& what) {
  throw Error(ErrorCode::kInvalidParameter, what);
}

}  // namespace kvbench
