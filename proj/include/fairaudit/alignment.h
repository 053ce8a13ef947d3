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

// Token-level minimum edit distance alignment and word error rate.

#ifndef FAIRAUDIT_ALIGNMENT_H_
#define FAIRAUDIT_ALIGNMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairaudit/text.h"

namespace fairaudit {

struct AlignmentCounts {
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;
  int64_t matches = 0;
  int64_t reference_length = 0;  // == substitutions + deletions + matches

  int64_t errors() const { return substitutions + deletions + insertions; }
  int64_t hypothesis_length() const {
    return substitutions + insertions + matches;
  }

  AlignmentCounts& operator+=(const AlignmentCounts& other);
  friend bool operator==(const AlignmentCounts&,
                         const AlignmentCounts&) = default;
};

struct ScoredUtterance {
  std::string utterance_id;
  AlignmentCounts counts;
  int64_t error_count = 0;
  double wer = 0.0;
};

// Unit-cost Levenshtein alignment over tokens. Among minimum-cost
// alignments, those with the most match/substitution moves are kept; the
// backtrace then prefers match > substitution > deletion > insertion. The
// split between S, D and I is deterministic, and swapping the arguments
// exchanges D and I. Throws kEmptyReference.
AlignmentCounts Align(std::span<const std::string> reference,
                      std::span<const std::string> hypothesis);

// (S + D + I) / N. Throws kZeroReference when N == 0.
double Wer(const AlignmentCounts& counts);

ScoredUtterance Score(std::string utterance_id,
                      const AlignmentCounts& counts);

// Pooled WER: total errors over total reference tokens. Throws
// kEmptyCollection.
double CorpusWer(std::span<const ScoredUtterance> scored);

// utterance_id -> hypothesis, from a CSV with header
// `utterance_id,hypothesis` (extra columns ignored). Hypotheses may be
// empty. Throws kMalformedTranscript on a missing header column, a field
// count mismatch, or a duplicate id.
class TranscriptTable {
 public:
  static TranscriptTable Parse(std::string_view csv_text);
  static TranscriptTable Load(const std::string& path);

  void Add(std::string utterance_id, std::string hypothesis);
  const std::string* Find(const std::string& utterance_id) const;
  size_t size() const { return hypotheses_.size(); }

 private:
  std::unordered_map<std::string, std::string> hypotheses_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ALIGNMENT_H_
