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

// Evaluation corpus: utterance references plus self-reported speaker
// demographics, loaded from CSV.
//
// CSV header (UTF-8, column order free, extra columns ignored):
//   utterance_id,speaker_id,reference,duration_s,gender,first_language,
//   socioeconomic_bkg,ethnicity,age_band
// `duration_s` and `age_band` may be empty. Empty demographic cells become
// the label "unknown", which is an ordinary category everywhere downstream.

#ifndef FAIRAUDIT_CORPUS_H_
#define FAIRAUDIT_CORPUS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fairaudit {

inline constexpr std::string_view kUnknownLabel = "unknown";

enum class Attribute {
  kGender,
  kFirstLanguage,
  kSocioeconomicBkg,
  kEthnicity,
  kAgeBand,
};

inline constexpr std::array<Attribute, 5> kAllAttributes = {
    Attribute::kGender, Attribute::kFirstLanguage,
    Attribute::kSocioeconomicBkg, Attribute::kEthnicity, Attribute::kAgeBand};

// The four categories scored by default and used to define sampling strata.
inline constexpr std::array<Attribute, 4> kStrataAttributes = {
    Attribute::kGender, Attribute::kFirstLanguage,
    Attribute::kSocioeconomicBkg, Attribute::kEthnicity};

std::string_view AttributeName(Attribute attribute);
// Throws Error(kUnknownAttribute).
Attribute ParseAttribute(std::string_view name);

struct DemographicProfile {
  std::string gender{kUnknownLabel};
  std::string first_language{kUnknownLabel};
  std::string socioeconomic_bkg{kUnknownLabel};
  std::string ethnicity{kUnknownLabel};
  std::optional<std::string> age_band;

  // Absent age_band reads as "unknown".
  std::string_view Get(Attribute attribute) const;
  void Set(Attribute attribute, std::string label);
};

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string reference;
  std::optional<double> duration_s;
  DemographicProfile profile;
};

struct CorpusProvenance {
  std::string source;   // path, or a description for in-memory corpora
  std::string options;  // load or sampling options that produced the corpus
};

struct Corpus {
  std::vector<UtteranceRecord> records;  // load order
  CorpusProvenance provenance;

  size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct LoadOptions {
  // Normalize references when checking that they are non-empty. Must match
  // the normalization used at scoring time.
  bool normalize_text = true;
};

// Throws Error with kIoFailure, kMalformedRow (value = line),
// kDuplicateId, or kEmptyCorpus.
Corpus LoadCorpus(const std::string& path, const LoadOptions& options = {});
Corpus ParseCorpus(std::string_view csv_text, const std::string& source,
                   const LoadOptions& options = {});

// Canonical CSV serialization with the standard header.
std::string FormatCorpusCsv(const Corpus& corpus);

// Shannon entropy in bits of the empirical label distribution.
double Entropy(const Corpus& corpus, Attribute attribute);
double Entropy(const Corpus& corpus, std::string_view attribute_name);

// Label counts in first-seen order.
std::vector<std::pair<std::string, size_t>> LabelCounts(
    const Corpus& corpus, Attribute attribute);

// Per-stratum sample over the joint (gender, first_language,
// socioeconomic_bkg, ethnicity) cells. Each non-empty stratum of size n
// keeps max(1, round(fraction * n)) records chosen by a seeded
// Fisher-Yates shuffle; the result preserves corpus order. Pure in
// (corpus, fraction, seed).
Corpus StratifiedSample(const Corpus& corpus, double fraction, uint64_t seed);

size_t CountStrata(const Corpus& corpus);

struct CorpusStats {
  size_t count = 0;
  double total_duration_s = 0.0;
  size_t records_with_duration = 0;
  std::vector<std::pair<Attribute, double>> entropy;  // kAllAttributes order

  double total_duration_hours() const { return total_duration_s / 3600.0; }
  double EntropyOf(Attribute attribute) const;
};

CorpusStats ComputeCorpusStats(const Corpus& corpus);

// Human-readable table; when `sample` is given prints both columns.
std::string FormatStatsTable(const CorpusStats& original,
                             const CorpusStats* sample = nullptr);

}  // namespace fairaudit

#endif  // FAIRAUDIT_CORPUS_H_
