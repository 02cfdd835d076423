/*
 * Copyright 2026 The treetweak Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treetweak {

/// Machine-readable category of a failure. Every exception thrown by the
/// library is an `Error` carrying one of these.
enum class ErrorKind {
  kLengthMismatch,
  kZeroVariance,
  kSchemaMismatch,
  kUnknownCategory,
  kParseError,
  kIoError,
  kSchemaVersionMismatch,
  kCorruptModel,
  kEmptyDataset,
  kEmptyNode,
  kDegenerateLabels,
  kZeroVector,
  kNotNegative,
  kTooLarge,
  kEmptyInput,
  kDegenerateRanking,
  kInvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kUnknownCategory: return "UnknownCategory";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::kCorruptModel: return "CorruptModel";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kEmptyNode: return "EmptyNode";
    case ErrorKind::kDegenerateLabels: return "DegenerateLabels";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kNotNegative: return "NotNegative";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kDegenerateRanking: return "DegenerateRanking";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace treetweak
