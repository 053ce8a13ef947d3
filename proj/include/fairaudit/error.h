/*
 * Copyright 2026 The FairAudit Authors.
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

#ifndef FAIRAUDIT_ERROR_H_
#define FAIRAUDIT_ERROR_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  // corpus
  kMalformedRow,
  kDuplicateId,
  kEmptyCorpus,
  kUnknownAttribute,
  // alignment
  kEmptyReference,
  kZeroReference,
  kEmptyCollection,
  kMalformedTranscript,
  // glmm
  kSingleLevelAttribute,
  kSeparation,
  kNonFinite,
  kDimensionMismatch,
  kNotNested,
  kUnknownLevel,
  kDegenerateXbar,
  // fairness
  kTooFewLevels,
  kKeyMismatch,
  kBadProportions,
  kNonPositiveWeight,
  kCoverageTooLow,
  // store
  kNotFound,
  kInvalidModelId,
  // service
  kQueueFull,
  kCorpusUnavailable,
};

// Stable upper-camel name used in machine-readable diagnostics,
// e.g. "DuplicateId".
std::string_view ErrorCodeName(ErrorCode code);

// The single exception type thrown by the library. `value` carries an
// optional numeric payload (line number for MalformedRow, coverage fraction
// for CoverageTooLow).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> value = std::nullopt)
      : std::runtime_error(message), code_(code), value_(value) {}

  ErrorCode code() const { return code_; }
  const std::optional<double>& value() const { return value_; }

  // Returns a copy whose message is prefixed with `context: `.
  Error WithContext(const std::string& context) const {
    return Error(code_, context + ": " + what(), value_);
  }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ERROR_H_
