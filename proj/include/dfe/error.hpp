// Copyright 2026 The DFE Offload Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace dfe {

/// Failure classes raised by the core. The numeric values are mirrored by
/// `dfe_status` in the C API, so keep them in sync.
enum class ErrorCode : int {
  InvalidArgument = 1,
  Syntax = 2,
  UnknownIdentifier = 3,
  UnrollTooLarge = 4,
  LengthMismatch = 5,
  UnknownInput = 6,
  OutOfBounds = 7,
  UnconfiguredTag = 8,
  UnroutedPort = 9,
  NoPath = 10,
  Unroutable = 11,
  PreconditionViolated = 12,
  Format = 13,
  Io = 14,
  InvalidConfig = 15,
  NotEligible = 16,
  Internal = 17,
};

const char *error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Kernel-source failure (SyntaxError / UnknownIdentifier) with a 1-based
/// position.
class SourceError : public Error {
public:
  SourceError(ErrorCode code, const std::string &message, int line, int column)
      : Error(code, format(message, line, column)), line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  static std::string format(const std::string &message, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }

  int line_;
  int column_;
};

} // namespace dfe
