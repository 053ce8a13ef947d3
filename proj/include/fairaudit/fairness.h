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

// Fairness scoring cascade:
//
//   predicted group WER  ->  raw score per group (min-max to [0, 100])
//   -> category score (proportion-weighted mean of raw scores)
//   -> adjusted score (scaled by p / 0.05 when the LRT p < 0.05)
//   -> overall score (weighted mean of adjusted scores)
//   -> FAAS = 10 log10(overall / WER), with WER as a fraction.

#ifndef FAIRAUDIT_FAIRNESS_H_
#define FAIRAUDIT_FAIRNESS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/alignment.h"
#include "fairaudit/glmm.h"

namespace fairaudit {

inline constexpr double kSignificanceLevel = 0.05;

using LevelValues = std::map<std::string, double>;

// 100 (1 - (w_g - min) / (max - min)); all 100 when max == min.
// Throws kTooFewLevels for fewer than two levels.
LevelValues RawFairnessScores(const LevelValues& predicted_wer);

// sum_g p_g * score_g. Throws kKeyMismatch and kBadProportions (sum not
// within 1e-9 of 1, or a negative entry).
double CategoryScore(const LevelValues& raw_scores,
                     const LevelValues& proportions);

double AdjustedScore(double category_score, double p_value);

// sum_c w_c s_c / sum_c w_c; empty `weights` means equal weights. Throws
// kKeyMismatch and kNonPositiveWeight.
double OverallScore(const LevelValues& adjusted, const LevelValues& weights);

enum class FaasStatus {
  kFinite,
  kPerfectAccuracy,  // WER == 0: undefined, ranks first
  kZeroFairness,     // overall == 0: negative infinity
};

struct FaasScore {
  double value = 0.0;  // +inf / -inf for the sentinels
  FaasStatus status = FaasStatus::kFinite;

  bool finite() const { return status == FaasStatus::kFinite; }
};

std::string_view FaasStatusName(FaasStatus status);
FaasStatus ParseFaasStatus(std::string_view name);

// Throws kInvalidArgument for negative or non-finite inputs.
FaasScore Faas(double overall_score, double wer);

enum class Tier {
  kSeverelyBiased,   // [0, 20)
  kBiased,           // [20, 40)
  kModeratelyFair,   // [40, 60)
  kFair,             // [60, 80)
  kExemplarilyFair,  // [80, 100]
};

std::string_view TierLabel(Tier tier);
Tier ParseTier(std::string_view label);
Tier ClassifyTier(double overall_score);

struct GroupRow {
  std::string level;
  size_t count = 0;
  double proportion = 0.0;
  double observed_wer = 0.0;  // pooled over the level's utterances
  double beta = 0.0;
  double predicted_wer = 0.0;
  double raw_score = 0.0;
};

struct CategoryReport {
  std::string attribute;
  std::string reference_level;
  std::vector<GroupRow> groups;  // reference level first
  std::vector<std::string> merged_levels;  // labels pooled into other_merged
  double xbar = 0.0;
  double category_score = 0.0;
  LrtResult lrt;
  double adjusted_score = 0.0;
  Tier tier = Tier::kSeverelyBiased;
  double weight = 1.0;
  // Absent when the audited utterances contain no errors at all.
  std::optional<FittedModel> full_model;
  std::optional<FittedModel> reduced_model;
};

struct SkippedCategory {
  std::string attribute;
  std::string reason;
};

struct AuditResult {
  std::string model_id;
  double corpus_wer = 0.0;
  AlignmentCounts totals;
  std::vector<CategoryReport> categories;
  std::vector<SkippedCategory> skipped_categories;
  double overall_score = 0.0;
  FaasScore faas;
  Tier tier = Tier::kSeverelyBiased;
  size_t corpus_size = 0;
  size_t scored_utterances = 0;
  double coverage = 0.0;
  std::vector<std::string> missing_hypotheses;
  size_t unmatched_transcripts = 0;
  std::optional<std::vector<AuditedUtterance>> per_utterance;
  std::string created_at;  // UTC RFC 3339
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_FAIRNESS_H_
