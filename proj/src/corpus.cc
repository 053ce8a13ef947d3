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

#include "fairaudit/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fairaudit/csv.h"
#include "fairaudit/error.h"
#include "fairaudit/text.h"

namespace fairaudit {
namespace {

constexpr std::array<std::string_view, 9> kCorpusColumns = {
    "utterance_id", "speaker_id",        "reference",
    "duration_s",   "gender",            "first_language",
    "socioeconomic_bkg", "ethnicity",    "age_band"};
// utterance_id, speaker_id and reference; absent later columns read as empty.
constexpr size_t kRequiredColumns = 3;

Error MalformedRow(int line, const std::string& reason) {
  return Error(ErrorCode::kMalformedRow,
               "line " + std::to_string(line) + ": " + reason, line);
}

std::string LabelOrUnknown(std::string_view raw) {
  std::string label = NormalizeLabel(raw);
  return label.empty() ? std::string(kUnknownLabel) : label;
}

// Unbiased draw from [0, n) by rejection, without
// std::uniform_int_distribution.
uint64_t UniformIndex(std::mt19937_64& rng, uint64_t n) {
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

std::string FormatDuration(double seconds) {
  std::ostringstream out;
  out.precision(17);
  out << seconds;
  return out.str();
}

}  // namespace

std::string_view AttributeName(Attribute attribute) {
  switch (attribute) {
    case Attribute::kGender:           return "gender";
    case Attribute::kFirstLanguage:    return "first_language";
    case Attribute::kSocioeconomicBkg: return "socioeconomic_bkg";
    case Attribute::kEthnicity:        return "ethnicity";
    case Attribute::kAgeBand:          return "age_band";
  }
  return "";
}

Attribute ParseAttribute(std::string_view name) {
  for (Attribute a : kAllAttributes) {
    if (AttributeName(a) == name) return a;
  }
  throw Error(ErrorCode::kUnknownAttribute,
              "unknown attribute '" + std::string(name) + "'");
}

std::string_view DemographicProfile::Get(Attribute attribute) const {
  switch (attribute) {
    case Attribute::kGender:           return gender;
    case Attribute::kFirstLanguage:    return first_language;
    case Attribute::kSocioeconomicBkg: return socioeconomic_bkg;
    case Attribute::kEthnicity:        return ethnicity;
    case Attribute::kAgeBand:
      return age_band ? std::string_view(*age_band) : kUnknownLabel;
  }
  return kUnknownLabel;
}

void DemographicProfile::Set(Attribute attribute, std::string label) {
  switch (attribute) {
    case Attribute::kGender:           gender = std::move(label); break;
    case Attribute::kFirstLanguage:    first_language = std::move(label); break;
    case Attribute::kSocioeconomicBkg: socioeconomic_bkg = std::move(label); break;
    case Attribute::kEthnicity:        ethnicity = std::move(label); break;
    case Attribute::kAgeBand:          age_band = std::move(label); break;
  }
}

Corpus LoadCorpus(const std::string& path, const LoadOptions& options) {
  return ParseCorpus(csv::ReadFile(path), path, options);
}

Corpus ParseCorpus(std::string_view csv_text, const std::string& source,
                   const LoadOptions& options) {
  const std::vector<csv::Row> rows = csv::Parse(csv_text);
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, source + ": no header row");
  }

  std::array<int, kCorpusColumns.size()> column{};
  const auto& header = rows.front().fields;
  for (size_t c = 0; c < kCorpusColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kCorpusColumns[c]);
    if (it == header.end() && c >= kRequiredColumns) {
      column[c] = -1;
      continue;
    }
    if (it == header.end()) {
      throw MalformedRow(rows.front().line,
                         "header is missing column '" +
                             std::string(kCorpusColumns[c]) + "'");
    }
    column[c] = static_cast<int>(it - header.begin());
  }

  Corpus corpus;
  corpus.provenance.source = source;
  corpus.provenance.options =
      options.normalize_text ? "normalize_text=true" : "normalize_text=false";
  std::unordered_set<std::string> seen;

  for (size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw MalformedRow(row.line, "expected " + std::to_string(header.size()) +
                                       " fields, got " +
                                       std::to_string(row.fields.size()));
    }
    static const std::string kEmpty;
    auto field = [&](size_t c) -> const std::string& {
      return column[c] < 0 ? kEmpty : row.fields[column[c]];
    };

    UtteranceRecord record;
    record.utterance_id = field(0);
    record.speaker_id = field(1);
    record.reference = field(2);
    if (record.utterance_id.empty()) {
      throw MalformedRow(row.line, "empty utterance_id");
    }
    if (record.speaker_id.empty()) {
      throw MalformedRow(row.line, "empty speaker_id");
    }
    if (Tokenize(record.reference, options.normalize_text).empty()) {
      throw MalformedRow(row.line, "reference '" + record.reference +
                                       "' has no tokens after normalization");
    }
    if (!field(3).empty()) {
      double seconds = 0.0;
      size_t consumed = 0;
      try {
        seconds = std::stod(field(3), &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != field(3).size() || !std::isfinite(seconds) ||
          seconds < 0.0) {
        throw MalformedRow(row.line, "bad duration_s '" + field(3) + "'");
      }
      record.duration_s = seconds;
    }
    record.profile.gender = LabelOrUnknown(field(4));
    record.profile.first_language = LabelOrUnknown(field(5));
    record.profile.socioeconomic_bkg = LabelOrUnknown(field(6));
    record.profile.ethnicity = LabelOrUnknown(field(7));
    if (!NormalizeLabel(field(8)).empty()) {
      record.profile.age_band = NormalizeLabel(field(8));
    }

    if (!seen.insert(record.utterance_id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate utterance_id '" + record.utterance_id +
                      "' at line " + std::to_string(row.line));
    }
    corpus.records.push_back(std::move(record));
  }

  if (corpus.records.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, source + ": no records");
  }
  return corpus;
}

std::string FormatCorpusCsv(const Corpus& corpus) {
  std::string out = csv::FormatRow(
      std::vector<std::string>(kCorpusColumns.begin(), kCorpusColumns.end()));
  for (const auto& rec : corpus.records) {
    out += csv::FormatRow({
        rec.utterance_id,
        rec.speaker_id,
        rec.reference,
        rec.duration_s ? FormatDuration(*rec.duration_s) : "",
        rec.profile.gender,
        rec.profile.first_language,
        rec.profile.socioeconomic_bkg,
        rec.profile.ethnicity,
        rec.profile.age_band.value_or(""),
    });
  }
  return out;
}

std::vector<std::pair<std::string, size_t>> LabelCounts(const Corpus& corpus,
                                                        Attribute attribute) {
  std::vector<std::pair<std::string, size_t>> counts;
  std::unordered_map<std::string_view, size_t> slot;
  for (const auto& rec : corpus.records) {
    const std::string_view label = rec.profile.Get(attribute);
    auto [it, inserted] = slot.try_emplace(label, counts.size());
    if (inserted) counts.emplace_back(std::string(label), 0);
    ++counts[it->second].second;
  }
  return counts;
}

double Entropy(const Corpus& corpus, Attribute attribute) {
  if (corpus.empty()) return 0.0;
  // Sums in label order.
  std::map<std::string, size_t> counts;
  for (const auto& [label, n] : LabelCounts(corpus, attribute)) {
    counts[label] = n;
  }
  const double total = static_cast<double>(corpus.size());
  double bits = 0.0;
  for (const auto& [label, n] : counts) {
    const double p = static_cast<double>(n) / total;
    bits -= p * std::log2(p);
  }
  return bits == 0.0 ? 0.0 : bits;  // no -0.0
}

double Entropy(const Corpus& corpus, std::string_view attribute_name) {
  return Entropy(corpus, ParseAttribute(attribute_name));
}

namespace {

using StratumKey = std::array<std::string, kStrataAttributes.size()>;

std::map<StratumKey, std::vector<size_t>> GroupByStratum(const Corpus& corpus) {
  std::map<StratumKey, std::vector<size_t>> strata;
  for (size_t i = 0; i < corpus.records.size(); ++i) {
    StratumKey key;
    for (size_t a = 0; a < kStrataAttributes.size(); ++a) {
      key[a] = std::string(corpus.records[i].profile.Get(kStrataAttributes[a]));
    }
    strata[key].push_back(i);
  }
  return strata;
}

}  // namespace

size_t CountStrata(const Corpus& corpus) { return GroupByStratum(corpus).size(); }

Corpus StratifiedSample(const Corpus& corpus, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample fraction must be in (0, 1], got " +
                    std::to_string(fraction));
  }
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "cannot sample an empty corpus");
  }

  std::mt19937_64 rng(seed);
  std::vector<size_t> keep;
  keep.reserve(static_cast<size_t>(std::ceil(fraction * corpus.size())) + 64);
  for (auto& [key, members] : GroupByStratum(corpus)) {
    const size_t n = members.size();
    const size_t take = std::max<size_t>(
        1, static_cast<size_t>(std::llround(fraction * static_cast<double>(n))));
    // Partial Fisher-Yates: the first `take` slots hold the sample.
    for (size_t i = 0; i < take && i + 1 < n; ++i) {
      const size_t j = i + UniformIndex(rng, n - i);
      std::swap(members[i], members[j]);
    }
    keep.insert(keep.end(), members.begin(), members.begin() + take);
  }
  std::sort(keep.begin(), keep.end());

  Corpus sample;
  sample.records.reserve(keep.size());
  for (size_t i : keep) sample.records.push_back(corpus.records[i]);
  sample.provenance.source = corpus.provenance.source;
  std::ostringstream options;
  options << corpus.provenance.options << ";stratified_sample(fraction="
          << fraction << ",seed=" << seed << ")";
  sample.provenance.options = options.str();
  return sample;
}

double CorpusStats::EntropyOf(Attribute attribute) const {
  for (const auto& [a, bits] : entropy) {
    if (a == attribute) return bits;
  }
  return 0.0;
}

CorpusStats ComputeCorpusStats(const Corpus& corpus) {
  CorpusStats stats;
  stats.count = corpus.size();
  for (const auto& rec : corpus.records) {
    if (rec.duration_s) {
      stats.total_duration_s += *rec.duration_s;
      ++stats.records_with_duration;
    }
  }
  for (Attribute a : kAllAttributes) {
    stats.entropy.emplace_back(a, Entropy(corpus, a));
  }
  return stats;
}

std::string FormatStatsTable(const CorpusStats& original,
                             const CorpusStats* sample) {
  std::string out;
  char line[160];
  auto row = [&](const char* label, const std::string& a,
                 const std::string& b) {
    if (sample) {
      std::snprintf(line, sizeof(line), "%-28s %12s %12s\n", label, a.c_str(),
                    b.c_str());
    } else {
      std::snprintf(line, sizeof(line), "%-28s %12s\n", label, a.c_str());
    }
    out += line;
  };
  auto fixed = [](double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
  };

  row("Attribute", "Original", "Sampled");
  row("Total samples", std::to_string(original.count),
      sample ? std::to_string(sample->count) : "");
  row("Total duration (hrs)", fixed(original.total_duration_hours(), 2),
      sample ? fixed(sample->total_duration_hours(), 2) : "");
  for (const auto& [attribute, bits] : original.entropy) {
    const std::string label = "Entropy (" + std::string(AttributeName(attribute)) + ")";
    row(label.c_str(), fixed(bits, 4),
        sample ? fixed(sample->EntropyOf(attribute), 4) : "");
  }
  return out;
}

}  // namespace fairaudit
