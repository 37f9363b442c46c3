/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ananke {

enum class ErrorCode {
  kInvalidEntity,
  kPhaseParse,
  kMalformedLine,
  kIo,
  kUnknownNode,
  kDimensionMismatch,
  kEmptyIndex,
  kEmbedder,
  kMissingPlaceholder,
  kNoJsonFound,
  kSchemaViolation,
  kLlmTransport,
  kLlmTimeout,
  kLlmMalformedResponse,
  kCassetteMiss,
  kPromptShapeUnrecognized,
  kFormatVersionMismatch,
  kDuplicateScenario,
  kDuplicateUnit,
  kUnknownUnit,
  kAlertUnresolved,
  kOutOfUniverse,
  kSpecInvalid,
  kConfigInvalid,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the line parsers; carries the 1-based line number.
class MalformedLine : public Error {
 public:
  MalformedLine(std::int64_t line_no, const std::string& reason)
      : Error(ErrorCode::kMalformedLine,
              "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(reason) {}

  std::int64_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::int64_t line_no_;
  std::string reason_;
};

}  // namespace ananke
