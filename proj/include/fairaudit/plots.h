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

// Plot-ready summaries of per-utterance WER: box-plot five-number summaries
// and fixed-bin histograms, per demographic level.

#ifndef FAIRAUDIT_PLOTS_H_
#define FAIRAUDIT_PLOTS_H_

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairaudit/fairness.h"

namespace fairaudit {

// Quantile by linear interpolation between closest ranks, inclusive
// (position q * (n - 1) in the sorted sample). `sorted` must be ascending
// and non-empty.
double Quantile(std::span<const double> sorted, double q);

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Throws kEmptyCollection.
FiveNumberSummary Summarize(std::span<const double> values);

struct Histogram {
  static constexpr double kBinWidth = 0.05;
  static constexpr double kUpper = 2.0;
  static constexpr int kBins = 40;  // [0, 0.05), ..., [1.95, 2.0]

  std::vector<size_t> counts = std::vector<size_t>(kBins, 0);
  size_t overflow = 0;  // values > 2.0
};

Histogram WerHistogram(std::span<const double> values);

struct LevelPlot {
  std::string level;
  size_t count = 0;
  FiveNumberSummary box;
  Histogram histogram;
};

struct AttributePlot {
  std::string attribute;
  std::vector<LevelPlot> levels;  // report level order
};

// Groups per-utterance WER by each category's (post-merge) levels. Throws
// kNotFound when the audit did not retain per-utterance detail.
std::vector<AttributePlot> BuildPlots(const AuditResult& result);

nlohmann::json PlotsToJson(const std::string& model_id,
                           const std::vector<AttributePlot>& plots);

}  // namespace fairaudit

#endif  // FAIRAUDIT_PLOTS_H_
