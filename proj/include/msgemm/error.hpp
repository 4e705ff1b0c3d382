// Copyright 2026 The msgemm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace msgemm {

enum class ErrorKind {
  kInvalidArgument,
  kUnrepresentable,
  kOutOfRange,
  kShapeMismatch,
  kBudgetExceeded,
  kFormat,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kUnrepresentable: return "unrepresentable value";
    case ErrorKind::kOutOfRange: return "out of range";
    case ErrorKind::kShapeMismatch: return "shape mismatch";
    case ErrorKind::kBudgetExceeded: return "table budget exceeded";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kIo: return "io error";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map them to stable exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace msgemm
