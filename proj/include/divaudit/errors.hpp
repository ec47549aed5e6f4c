//
// Copyright 2026 The divaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DIVAUDIT_ERRORS_HPP_
#define DIVAUDIT_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace divaudit {

enum class ErrorCode {
  kZeroVector,
  kDimensionMismatch,
  kNonFinite,
  kEmptySet,
  kInsufficientClassExamples,
  kInsufficientExamples,
  kGroupTooSmall,
  kDegenerateNormalization,
  kInvalidParameter,
  kIndexOutOfRange,
  kInfeasibleConfig,
  kParseError,
};

// Stable lowercase tag, used in sweep output to label failed cells.
constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kEmptySet: return "empty_set";
    case ErrorCode::kInsufficientClassExamples: return "insufficient_class_examples";
    case ErrorCode::kInsufficientExamples: return "insufficient_examples";
    case ErrorCode::kGroupTooSmall: return "group_too_small";
    case ErrorCode::kDegenerateNormalization: return "degenerate_normalization";
    case ErrorCode::kInvalidParameter: return "invalid_parameter";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kInfeasibleConfig: return "infeasible_config";
    case ErrorCode::kParseError: return "parse_error";
  }
  return "unknown";
}

class AuditError : public std::runtime_error {
 public:
  AuditError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace divaudit

#endif  // DIVAUDIT_ERRORS_HPP_
