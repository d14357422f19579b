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

#include "dfe/error.hpp"

namespace dfe {

const char *error_code_name(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::Syntax: return "SyntaxError";
  case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
  case ErrorCode::UnrollTooLarge: return "UnrollTooLarge";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::UnknownInput: return "UnknownInput";
  case ErrorCode::OutOfBounds: return "OutOfBounds";
  case ErrorCode::UnconfiguredTag: return "UnconfiguredTag";
  case ErrorCode::UnroutedPort: return "UnroutedPort";
  case ErrorCode::NoPath: return "NoPath";
  case ErrorCode::Unroutable: return "Unroutable";
  case ErrorCode::PreconditionViolated: return "PreconditionViolated";
  case ErrorCode::Format: return "FormatError";
  case ErrorCode::Io: return "IoError";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::NotEligible: return "NotEligible";
  case ErrorCode::Internal: return "InternalError";
  }
  return "Unknown";
}

} // namespace dfe
