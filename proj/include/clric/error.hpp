#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clric {

enum class ErrorKind {
  kConfiguration,
  kUsage,
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kUnsupportedDtype,
  kTruncated,
  kLengthMismatch,
  kNonFinite,
  kInvalidHeader,
  kSymbolOutOfRange,
  kCorruptStream,
  kTraining,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kBadMagic: return "bad magic";
    case ErrorKind::kUnsupportedVersion: return "unsupported version";
    case ErrorKind::kUnsupportedDtype: return "unsupported dtype";
    case ErrorKind::kTruncated: return "truncated data";
    case ErrorKind::kLengthMismatch: return "length mismatch";
    case ErrorKind::kNonFinite: return "non-finite value";
    case ErrorKind::kInvalidHeader: return "invalid header";
    case ErrorKind::kSymbolOutOfRange: return "symbol out of range";
    case ErrorKind::kCorruptStream: return "corrupt stream";
    case ErrorKind::kTraining: return "training failure";
  }
  return "unknown error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace clric
