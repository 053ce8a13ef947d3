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

#include "fairaudit/alignment.h"

#include <algorithm>

#include "fairaudit/csv.h"
#include "fairaudit/error.h"

namespace fairaudit {

AlignmentCounts& AlignmentCounts::operator+=(const AlignmentCounts& other) {
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  matches += other.matches;
  reference_length += other.reference_length;
  return *this;
}

AlignmentCounts Align(std::span<const std::string> reference,
                      std::span<const std::string> hypothesis) {
  if (reference.empty()) {
    throw Error(ErrorCode::kEmptyReference, "cannot align an empty reference");
  }
  const size_t n = reference.size();
  const size_t m = hypothesis.size();
  const size_t stride = m + 1;

  // key[i * stride + j] orders alignments of reference[0, i) and
  // hypothesis[0, j) by edit cost, then by the number of diagonal moves
  // (more is better): key = cost * scale - diagonals.
  const int64_t scale = static_cast<int64_t>(n + m + 1);
  std::vector<int64_t> key((n + 1) * stride);
  for (size_t j = 0; j <= m; ++j) key[j] = static_cast<int64_t>(j) * scale;
  for (size_t i = 1; i <= n; ++i) {
    int64_t* row = &key[i * stride];
    const int64_t* up = &key[(i - 1) * stride];
    row[0] = static_cast<int64_t>(i) * scale;
    for (size_t j = 1; j <= m; ++j) {
      const int64_t diag =
          up[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : scale) - 1;
      row[j] = std::min({diag, up[j] + scale, row[j - 1] + scale});
    }
  }

  AlignmentCounts counts;
  counts.reference_length = static_cast<int64_t>(n);
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    const int64_t here = key[i * stride + j];
    if (i > 0 && j > 0) {
      const int64_t diag = key[(i - 1) * stride + (j - 1)];
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (same && here == diag - 1) {
        ++counts.matches;
        --i, --j;
        continue;
      }
      if (!same && here == diag + scale - 1) {
        ++counts.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == key[(i - 1) * stride + j] + scale) {
      ++counts.deletions;
      --i;
      continue;
    }
    ++counts.insertions;
    --j;
  }
  return counts;
}

double Wer(const AlignmentCounts& counts) {
  if (counts.reference_length <= 0) {
    throw Error(ErrorCode::kZeroReference, "WER is undefined for N = 0");
  }
  return static_cast<double>(counts.errors()) /
         static_cast<double>(counts.reference_length);
}

ScoredUtterance Score(std::string utterance_id, const AlignmentCounts& counts) {
  ScoredUtterance scored;
  scored.utterance_id = std::move(utterance_id);
  scored.counts = counts;
  scored.error_count = counts.errors();
  scored.wer = Wer(counts);
  return scored;
}

double CorpusWer(std::span<const ScoredUtterance> scored) {
  if (scored.empty()) {
    throw Error(ErrorCode::kEmptyCollection,
                "corpus WER needs at least one utterance");
  }
  int64_t errors = 0;
  int64_t words = 0;
  for (const auto& s : scored) {
    errors += s.counts.errors();
    words += s.counts.reference_length;
  }
  if (words == 0) {
    throw Error(ErrorCode::kZeroReference, "corpus has no reference tokens");
  }
  return static_cast<double>(errors) / static_cast<double>(words);
}

TranscriptTable TranscriptTable::Parse(std::string_view csv_text) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::Parse(csv_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedTranscript, e.what());
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kMalformedTranscript, "transcript CSV is empty");
  }
  const auto& header = rows.front().fields;
  const auto id_col = std::find(header.begin(), header.end(), "utterance_id");
  const auto hyp_col = std::find(header.begin(), header.end(), "hypothesis");
  if (id_col == header.end() || hyp_col == header.end()) {
    throw Error(ErrorCode::kMalformedTranscript,
                "transcript CSV header must contain utterance_id and "
                "hypothesis");
  }
  const size_t id_index = id_col - header.begin();
  const size_t hyp_index = hyp_col - header.begin();

  TranscriptTable table;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformedTranscript,
                  "line " + std::to_string(row.line) + ": expected " +
                      std::to_string(header.size()) + " fields",
                  row.line);
    }
    if (row.fields[id_index].empty()) {
      throw Error(ErrorCode::kMalformedTranscript,
                  "line " + std::to_string(row.line) + ": empty utterance_id",
                  row.line);
    }
    if (table.Find(row.fields[id_index]) != nullptr) {
      throw Error(ErrorCode::kMalformedTranscript,
                  "duplicate utterance_id '" + row.fields[id_index] + "'",
                  row.line);
    }
    table.Add(row.fields[id_index], row.fields[hyp_index]);
  }
  return table;
}

TranscriptTable TranscriptTable::Load(const std::string& path) {
  return Parse(csv::ReadFile(path));
}

void TranscriptTable::Add(std::string utterance_id, std::string hypothesis) {
  hypotheses_.insert_or_assign(std::move(utterance_id), std::move(hypothesis));
}

const std::string* TranscriptTable::Find(const std::string& utterance_id) const {
  auto it = hypotheses_.find(utterance_id);
  return it == hypotheses_.end() ? nullptr : &it->second;
}

}  // namespace fairaudit
