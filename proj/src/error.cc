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

#include "fairaudit/error.h"

namespace fairaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:      return "InvalidArgument";
    case ErrorCode::kIoFailure:            return "IoFailure";
    case ErrorCode::kMalformedRow:         return "MalformedRow";
    case ErrorCode::kDuplicateId:          return "DuplicateId";
    case ErrorCode::kEmptyCorpus:          return "EmptyCorpus";
    case ErrorCode::kUnknownAttribute:     return "UnknownAttribute";
    case ErrorCode::kEmptyReference:       return "EmptyReference";
    case ErrorCode::kZeroReference:        return "ZeroReference";
    case ErrorCode::kEmptyCollection:      return "EmptyCollection";
    case ErrorCode::kMalformedTranscript:  return "MalformedTranscript";
    case ErrorCode::kSingleLevelAttribute: return "SingleLevelAttribute";
    case ErrorCode::kSeparation:           return "Separation";
    case ErrorCode::kNonFinite:            return "NonFinite";
    case ErrorCode::kDimensionMismatch:    return "DimensionMismatch";
    case ErrorCode::kNotNested:            return "NotNested";
    case ErrorCode::kUnknownLevel:         return "UnknownLevel";
    case ErrorCode::kDegenerateXbar:       return "DegenerateXbar";
    case ErrorCode::kTooFewLevels:         return "TooFewLevels";
    case ErrorCode::kKeyMismatch:          return "KeyMismatch";
    case ErrorCode::kBadProportions:       return "BadProportions";
    case ErrorCode::kNonPositiveWeight:    return "NonPositiveWeight";
    case ErrorCode::kCoverageTooLow:       return "CoverageTooLow";
    case ErrorCode::kNotFound:             return "NotFound";
    case ErrorCode::kInvalidModelId:       return "InvalidModelId";
    case ErrorCode::kQueueFull:            return "QueueFull";
    case ErrorCode::kCorpusUnavailable:    return "CorpusUnavailable";
  }
  return "Unknown";
}

}  // namespace fairaudit
