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

#ifndef FAIRAUDIT_AUDIT_H_
#define FAIRAUDIT_AUDIT_H_

#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/alignment.h"
#include "fairaudit/corpus.h"
#include "fairaudit/fairness.h"
#include "fairaudit/glmm.h"
#include "fairaudit/kernels.h"

namespace fairaudit {

struct AuditConfig {
  std::vector<Attribute> attributes{kStrataAttributes.begin(),
                                    kStrataAttributes.end()};
  // Category weights by attribute name; unlisted categories weigh 1.
  LevelValues weights;
  double min_coverage = 0.95;
  bool normalize_text = true;
  size_t min_level_size = 10;
  bool continuity_correction = true;
  bool keep_per_utterance = true;
  FitOptions fit;
  kernels::Execution execution = kernels::Execution::kParallel;
  // Fixed timestamp for reproducible documents; empty means "now".
  std::string created_at;
};

// [A-Za-z0-9._/-]{1,128}, excluding "." and "..".
bool IsValidModelId(std::string_view model_id);

std::string NowRfc3339();

// Joins transcripts to the corpus and aligns every covered utterance.
// `missing` receives corpus ids without a hypothesis.
std::vector<AuditedUtterance> ScoreTranscripts(
    const Corpus& corpus, const TranscriptTable& transcripts,
    const AuditConfig& config, std::vector<std::string>* missing = nullptr);

// Scores one demographic category on already-aligned utterances.
CategoryReport ScoreCategory(std::span<const AuditedUtterance> utterances,
                             Attribute attribute, const AuditConfig& config);

// Full audit. Throws kInvalidModelId, kCoverageTooLow (value = coverage),
// and module errors annotated with the attribute they came from.
// Categories with fewer than two levels are listed in skipped_categories;
// if every category is skipped the audit fails with kSingleLevelAttribute.
AuditResult RunAudit(const Corpus& corpus, const TranscriptTable& transcripts,
                     const std::string& model_id, const AuditConfig& config = {});

}  // namespace fairaudit

#endif  // FAIRAUDIT_AUDIT_H_
