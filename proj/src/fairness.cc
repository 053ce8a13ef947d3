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

#include "fairaudit/fairness.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairaudit/error.h"

namespace fairaudit {
namespace {

void RequireSameKeys(const LevelValues& a, const LevelValues& b,
                     const char* what) {
  bool same = a.size() == b.size();
  for (auto ia = a.begin(), ib = b.begin(); same && ia != a.end(); ++ia, ++ib) {
    same = ia->first == ib->first;
  }
  if (!same) {
    throw Error(ErrorCode::kKeyMismatch, std::string(what) + ": key sets differ");
  }
}

}  // namespace

LevelValues RawFairnessScores(const LevelValues& predicted_wer) {
  if (predicted_wer.size() < 2) {
    throw Error(ErrorCode::kTooFewLevels,
                "raw fairness scores need at least two levels");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [level, w] : predicted_wer) {
    if (!std::isfinite(w)) {
      throw Error(ErrorCode::kNonFinite, "predicted WER for '" + level +
                                             "' is not finite");
    }
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  LevelValues scores;
  for (const auto& [level, w] : predicted_wer) {
    if (hi == lo) {
      scores[level] = 100.0;
    } else if (w == lo) {
      scores[level] = 100.0;  // exact endpoints, free of rounding
    } else if (w == hi) {
      scores[level] = 0.0;
    } else {
      scores[level] = 100.0 * (1.0 - (w - lo) / (hi - lo));
    }
  }
  return scores;
}

double CategoryScore(const LevelValues& raw_scores,
                     const LevelValues& proportions) {
  RequireSameKeys(raw_scores, proportions, "CategoryScore");
  double total = 0.0;
  for (const auto& [level, p] : proportions) {
    if (!(p >= 0.0)) {
      throw Error(ErrorCode::kBadProportions,
                  "proportion for '" + level + "' is negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kBadProportions,
                "proportions sum to " + std::to_string(total));
  }
  double score = 0.0;
  for (const auto& [level, p] : proportions) score += p * raw_scores.at(level);
  return std::clamp(score, 0.0, 100.0);  // rounding in sum(p) == 1
}

double AdjustedScore(double category_score, double p_value) {
  if (p_value < kSignificanceLevel) {
    return category_score * (p_value / kSignificanceLevel);
  }
  return category_score;
}

double OverallScore(const LevelValues& adjusted, const LevelValues& given_weights) {
  LevelValues equal;
  if (given_weights.empty()) {
    for (const auto& [category, score] : adjusted) equal[category] = 1.0;
  }
  const LevelValues& weights = given_weights.empty() ? equal : given_weights;
  RequireSameKeys(adjusted, weights, "OverallScore");
  if (adjusted.empty()) {
    throw Error(ErrorCode::kKeyMismatch, "OverallScore: no categories");
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (const auto& [category, w] : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kNonPositiveWeight,
                  "weight for '" + category + "' must be positive");
    }
    numerator += w * adjusted.at(category);
    denominator += w;
  }
  return std::clamp(numerator / denominator, 0.0, 100.0);
}

std::string_view FaasStatusName(FaasStatus status) {
  switch (status) {
    case FaasStatus::kFinite:          return "ok";
    case FaasStatus::kPerfectAccuracy: return "perfect_accuracy";
    case FaasStatus::kZeroFairness:    return "zero_fairness";
  }
  return "ok";
}

FaasStatus ParseFaasStatus(std::string_view name) {
  for (FaasStatus s : {FaasStatus::kFinite, FaasStatus::kPerfectAccuracy,
                       FaasStatus::kZeroFairness}) {
    if (FaasStatusName(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown FAAS status '" + std::string(name) + "'");
}

FaasScore Faas(double overall_score, double wer) {
  if (!(overall_score >= 0.0) || !(wer >= 0.0) || !std::isfinite(overall_score) ||
      !std::isfinite(wer)) {
    throw Error(ErrorCode::kInvalidArgument,
                "FAAS needs finite nonnegative overall score and WER");
  }
  if (wer == 0.0) {
    return {std::numeric_limits<double>::infinity(), FaasStatus::kPerfectAccuracy};
  }
  if (overall_score == 0.0) {
    return {-std::numeric_limits<double>::infinity(), FaasStatus::kZeroFairness};
  }
  return {10.0 * std::log10(overall_score / wer), FaasStatus::kFinite};
}

std::string_view TierLabel(Tier tier) {
  switch (tier) {
    case Tier::kSeverelyBiased:  return "severely biased";
    case Tier::kBiased:          return "biased";
    case Tier::kModeratelyFair:  return "moderately fair";
    case Tier::kFair:            return "fair";
    case Tier::kExemplarilyFair: return "exemplarily fair";
  }
  return "";
}

Tier ParseTier(std::string_view label) {
  for (Tier t : {Tier::kSeverelyBiased, Tier::kBiased, Tier::kModeratelyFair,
                 Tier::kFair, Tier::kExemplarilyFair}) {
    if (TierLabel(t) == label) return t;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown tier '" + std::string(label) + "'");
}

Tier ClassifyTier(double overall_score) {
  if (std::isnan(overall_score) || overall_score < 0.0 || overall_score > 100.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "fairness score must be within [0, 100]");
  }
  if (overall_score < 20.0) return Tier::kSeverelyBiased;
  if (overall_score < 40.0) return Tier::kBiased;
  if (overall_score < 60.0) return Tier::kModeratelyFair;
  if (overall_score < 80.0) return Tier::kFair;
  return Tier::kExemplarilyFair;
}

}  // namespace fairaudit
