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

#include "fairaudit/plots.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fairaudit/error.h"

namespace fairaudit {

double Quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::kEmptyCollection, "quantile of an empty sample");
  }
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<size_t>(std::floor(position));
  const size_t above = std::min(below + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(below);
  return sorted[below] + fraction * (sorted[above] - sorted[below]);
}

FiveNumberSummary Summarize(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyCollection, "cannot summarize an empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted.front(), Quantile(sorted, 0.25), Quantile(sorted, 0.5),
          Quantile(sorted, 0.75), sorted.back()};
}

Histogram WerHistogram(std::span<const double> values) {
  Histogram histogram;
  for (double w : values) {
    if (w > Histogram::kUpper) {
      ++histogram.overflow;
      continue;
    }
    // Bin edges are multiples of 1/20; the epsilon keeps values such as
    // 0.15 (0.1499999...) in the bin whose left edge they name.
    int bin = static_cast<int>(std::floor(w / Histogram::kBinWidth + 1e-9));
    bin = std::clamp(bin, 0, Histogram::kBins - 1);
    ++histogram.counts[bin];
  }
  return histogram;
}

std::vector<AttributePlot> BuildPlots(const AuditResult& result) {
  if (!result.per_utterance) {
    throw Error(ErrorCode::kNotFound,
                "audit '" + result.model_id + "' has no per-utterance detail");
  }
  std::vector<AttributePlot> plots;
  for (const auto& category : result.categories) {
    const Attribute attribute = ParseAttribute(category.attribute);
    const std::set<std::string> merged(category.merged_levels.begin(),
                                       category.merged_levels.end());
    std::map<std::string, std::vector<double>> by_level;
    for (const auto& utt : *result.per_utterance) {
      std::string level(utt.profile.Get(attribute));
      if (merged.contains(level)) level = kMergedLevel;
      by_level[level].push_back(utt.wer());
    }
    AttributePlot plot;
    plot.attribute = category.attribute;
    for (const auto& group : category.groups) {
      auto it = by_level.find(group.level);
      if (it == by_level.end() || it->second.empty()) continue;
      LevelPlot level;
      level.level = group.level;
      level.count = it->second.size();
      level.box = Summarize(it->second);
      level.histogram = WerHistogram(it->second);
      plot.levels.push_back(std::move(level));
    }
    plots.push_back(std::move(plot));
  }
  return plots;
}

nlohmann::json PlotsToJson(const std::string& model_id,
                           const std::vector<AttributePlot>& plots) {
  using nlohmann::json;
  json attributes = json::array();
  for (const auto& plot : plots) {
    json levels = json::array();
    for (const auto& level : plot.levels) {
      levels.push_back(
          {{"level", level.level},
           {"n", level.count},
           {"box",
            {{"min", level.box.min},
             {"q1", level.box.q1},
             {"median", level.box.median},
             {"q3", level.box.q3},
             {"max", level.box.max}}},
           {"histogram",
            {{"bin_width", Histogram::kBinWidth},
             {"range", {0.0, Histogram::kUpper}},
             {"counts", level.histogram.counts},
             {"overflow", level.histogram.overflow}}}});
    }
    attributes.push_back({{"attribute", plot.attribute}, {"levels", levels}});
  }
  return {{"model_id", model_id}, {"attributes", attributes}};
}

}  // namespace fairaudit
