#include "kvbench/error.hpp"

namespace kvbench {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kConnectTimeout: return "connect-timeout";
    case ErrorCode::kConnectRefused: return "connect-refused";
    case ErrorCode::kAuthFailure: return "auth-failure";
    case ErrorCode::kResolveFailure: return "resolve-failure";
    case ErrorCode::kConnectionReset: return "connection-reset";
    case ErrorCode::kProtocolDesync: return "protocol-desync";
    case ErrorCode::kInfoUnavailable: return "info-unavailable";
    case ErrorCode::kNoData: return "no-data";
    case ErrorCode::kInvalidBaseline: return "invalid-baseline";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace kvbench
