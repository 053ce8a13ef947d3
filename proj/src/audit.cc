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

#include "fairaudit/audit.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <optional>
#include <unordered_map>

#include "fairaudit/error.h"

namespace fairaudit {

bool IsValidModelId(std::string_view model_id) {
  if (model_id.empty() || model_id.size() > 128) return false;
  if (model_id == "." || model_id == "..") return false;
  for (char c : model_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                    c == '/' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string NowRfc3339() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::vector<AuditedUtterance> ScoreTranscripts(
    const Corpus& corpus, const TranscriptTable& transcripts,
    const AuditConfig& config, std::vector<std::string>* missing) {
  std::vector<const UtteranceRecord*> covered;
  std::vector<TokenSequence> references;
  std::vector<TokenSequence> hypotheses;
  for (const auto& record : corpus.records) {
    const std::string* hypothesis = transcripts.Find(record.utterance_id);
    if (hypothesis == nullptr) {
      if (missing) missing->push_back(record.utterance_id);
      continue;
    }
    covered.push_back(&record);
    references.push_back(Tokenize(record.reference, config.normalize_text));
    hypotheses.push_back(Tokenize(*hypothesis, config.normalize_text));
  }

  std::vector<AlignmentCounts> counts(covered.size());
  kernels::AlignBatch(references, hypotheses, counts, config.execution);

  std::vector<AuditedUtterance> audited(covered.size());
  for (size_t k = 0; k < covered.size(); ++k) {
    audited[k].utterance_id = covered[k]->utterance_id;
    audited[k].speaker_id = covered[k]->speaker_id;
    audited[k].profile = covered[k]->profile;
    audited[k].counts = counts[k];
  }
  return audited;
}

CategoryReport ScoreCategory(std::span<const AuditedUtterance> utterances,
                             Attribute attribute, const AuditConfig& config) {
  DesignSpec setup;
  setup.attribute = attribute;
  setup.min_level_size = config.min_level_size;

  int64_t total_errors = 0;
  for (const auto& utt : utterances) total_errors += utt.counts.errors();
  const bool error_free = total_errors == 0;
  setup.continuity_correction = error_free || config.continuity_correction;
  const Design design = BuildDesign(utterances, setup);

  CategoryReport report;
  report.attribute = design.attribute;
  report.reference_level = design.levels.front();
  report.xbar = design.xbar;
  auto weight = config.weights.find(report.attribute);
  report.weight = weight == config.weights.end() ? 1.0 : weight->second;
  std::map<std::string, size_t> raw_counts;
  for (const auto& utt : utterances) {
    ++raw_counts[std::string(utt.profile.Get(attribute))];
  }
  for (const auto& [label, count] : raw_counts) {
    if (count < config.min_level_size) report.merged_levels.push_back(label);
  }

  std::vector<int64_t> level_errors(design.levels.size(), 0);
  std::vector<int64_t> level_words(design.levels.size(), 0);
  for (size_t i = 0; i < utterances.size(); ++i) {
    level_errors[design.level_of_row[i]] += utterances[i].counts.errors();
    level_words[design.level_of_row[i]] += utterances[i].counts.reference_length;
  }

  LevelValues predicted;
  std::vector<double> betas(design.levels.size(), 0.0);
  if (error_free) {
    for (const auto& level : design.levels) predicted[level] = 0.0;
    report.lrt = LrtFromLogLik(0.0, 0.0, design.attribute_df());
  } else {
    FitOptions fit = config.fit;
    fit.execution = config.execution;
    if (design.n_groups() < 2) fit.pin_sigma_zero = true;
    const Design reduced = DropAttribute(design);
    FittedModel full = FitPoissonGlmm(design, fit);
    FittedModel nested = FitPoissonGlmm(reduced, fit);
    report.lrt = Lrt(full, nested, design.attribute_df());
    for (size_t k = 0; k < design.levels.size(); ++k) {
      predicted[design.levels[k]] =
          PredictGroupWer(full, design.levels[k], design.xbar);
      betas[k] = full.beta_g.at(design.levels[k]);
    }
    report.full_model = std::move(full);
    report.reduced_model = std::move(nested);
  }

  const LevelValues raw = RawFairnessScores(predicted);
  LevelValues proportions;
  const double n = static_cast<double>(utterances.size());
  for (size_t k = 0; k < design.levels.size(); ++k) {
    proportions[design.levels[k]] = static_cast<double>(design.level_counts[k]) / n;
  }
  report.category_score = CategoryScore(raw, proportions);
  report.adjusted_score = AdjustedScore(report.category_score, report.lrt.p_value);
  report.tier = ClassifyTier(report.adjusted_score);

  for (size_t k = 0; k < design.levels.size(); ++k) {
    GroupRow row;
    row.level = design.levels[k];
    row.count = design.level_counts[k];
    row.proportion = proportions[row.level];
    row.observed_wer = static_cast<double>(level_errors[k]) /
                       static_cast<double>(level_words[k]);
    row.beta = betas[k];
    row.predicted_wer = predicted[row.level];
    row.raw_score = raw.at(row.level);
    report.groups.push_back(std::move(row));
  }
  return report;
}

AuditResult RunAudit(const Corpus& corpus, const TranscriptTable& transcripts,
                     const std::string& model_id, const AuditConfig& config) {
  if (!IsValidModelId(model_id)) {
    throw Error(ErrorCode::kInvalidModelId,
                "model_id '" + model_id + "' must match [A-Za-z0-9._/-]{1,128}");
  }
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus is empty");

  AuditResult result;
  result.model_id = model_id;
  result.corpus_size = corpus.size();

  size_t matched = 0;
  for (const auto& record : corpus.records) {
    if (transcripts.Find(record.utterance_id) != nullptr) ++matched;
  }
  result.coverage = static_cast<double>(matched) / static_cast<double>(corpus.size());
  if (result.coverage < config.min_coverage) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "transcripts cover %.4f of the corpus, below the required %.4f",
                  result.coverage, config.min_coverage);
    throw Error(ErrorCode::kCoverageTooLow, buf, result.coverage);
  }
  result.unmatched_transcripts = transcripts.size() - matched;

  std::vector<AuditedUtterance> audited =
      ScoreTranscripts(corpus, transcripts, config, &result.missing_hypotheses);
  result.scored_utterances = audited.size();
  std::vector<ScoredUtterance> scored;
  scored.reserve(audited.size());
  for (const auto& utt : audited) {
    result.totals += utt.counts;
    scored.push_back(Score(utt.utterance_id, utt.counts));
  }
  result.corpus_wer = CorpusWer(scored);

  // One independent model pair per category.
  const auto n_categories = static_cast<int64_t>(config.attributes.size());
  std::vector<std::optional<CategoryReport>> reports(n_categories);
  std::vector<std::exception_ptr> failures(n_categories);
#pragma omp parallel for schedule(dynamic, 1) if (config.execution == kernels::Execution::kParallel)
  for (int64_t c = 0; c < n_categories; ++c) {
    try {
      reports[c] = ScoreCategory(audited, config.attributes[c], config);
    } catch (...) {
      failures[c] = std::current_exception();
    }
  }

  LevelValues adjusted;
  LevelValues weights;
  for (int64_t c = 0; c < n_categories; ++c) {
    const std::string name(AttributeName(config.attributes[c]));
    if (failures[c]) {
      try {
        std::rethrow_exception(failures[c]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kSingleLevelAttribute) {
          result.skipped_categories.push_back({name, e.what()});
          continue;
        }
        throw e.WithContext("attribute " + name);
      }
    }
    CategoryReport& report = *reports[c];
    adjusted[name] = report.adjusted_score;
    weights[name] = report.weight;
    result.categories.push_back(std::move(report));
  }
  if (result.categories.empty()) {
    throw Error(ErrorCode::kSingleLevelAttribute,
                "no demographic category has two or more levels");
  }

  result.overall_score = OverallScore(adjusted, weights);
  result.faas = Faas(result.overall_score, result.corpus_wer);
  result.tier = ClassifyTier(result.overall_score);
  if (config.keep_per_utterance) result.per_utterance = std::move(audited);
  result.created_at = config.created_at.empty() ? NowRfc3339() : config.created_at;
  return result;
}

}  // namespace fairaudit
