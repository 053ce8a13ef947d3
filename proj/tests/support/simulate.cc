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

#include "support/simulate.h"

#include <stdlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fairaudit/csv.h"

namespace fairaudit::testing {

namespace {

std::string Id(const char* prefix, size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
  return buf;
}

template <typename Rng>
const std::string& Pick(Rng& rng, const std::vector<std::string>& labels,
                        const std::vector<double>& weights) {
  std::discrete_distribution<size_t> dist(weights.begin(), weights.end());
  return labels[dist(rng)];
}

}  // namespace

std::vector<AuditedUtterance> SimulateGlmm(const GlmmSimulation& sim) {
  std::mt19937_64 rng(sim.seed);
  std::normal_distribution<double> speaker_effect(0.0, 1.0);
  std::uniform_int_distribution<int> length(sim.min_length, sim.max_length);
  std::vector<AuditedUtterance> out;
  out.reserve(sim.speakers * sim.utterances_per_speaker);
  for (size_t s = 0; s < sim.speakers; ++s) {
    const bool treated = s % 2 == 1;
    const double u = sim.sigma_u * speaker_effect(rng);
    for (size_t k = 0; k < sim.utterances_per_speaker; ++k) {
      AuditedUtterance utt;
      utt.utterance_id = Id("u", out.size());
      utt.speaker_id = Id("s", s);
      utt.profile.gender = treated ? "male" : "female";
      const int n = length(rng);
      const double rate = n * std::exp(sim.beta0 + (treated ? sim.effect : 0.0) + u);
      const auto errors = static_cast<int64_t>(std::poisson_distribution<int64_t>(rate)(rng));
      utt.counts.reference_length = n;
      utt.counts.substitutions = std::min<int64_t>(errors, n);
      utt.counts.insertions = errors - utt.counts.substitutions;
      utt.counts.matches = n - utt.counts.substitutions;
      out.push_back(std::move(utt));
    }
  }
  return out;
}

Corpus MakeTableOneCorpus(size_t records, uint64_t seed) {
  static const std::vector<std::string> genders = {"female", "male"};
  static const std::vector<double> gender_w = {0.56, 0.44};
  static const std::vector<std::string> languages = {"english", "spanish", "mandarin",
                                                     "other"};
  static const std::vector<double> language_w = {0.65, 0.20, 0.11, 0.04};
  static const std::vector<std::string> ses = {"low", "medium", "high"};
  static const std::vector<double> ses_w = {0.25, 0.64, 0.11};
  static const std::vector<std::string> ethnicities = {
      "white", "black", "hispanic", "asian", "native", "pacific", "multiracial"};
  static const std::vector<double> ethnicity_w = {0.32, 0.22, 0.16, 0.12,
                                                  0.09, 0.06, 0.03};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> duration(1.5, 12.0);
  Corpus corpus;
  corpus.provenance.source = "synthetic";
  DemographicProfile profile;
  for (size_t i = 0; i < records; ++i) {
    if (i % 5 == 0) {
      profile.gender = Pick(rng, genders, gender_w);
      profile.first_language = Pick(rng, languages, language_w);
      profile.socioeconomic_bkg = Pick(rng, ses, ses_w);
      profile.ethnicity = Pick(rng, ethnicities, ethnicity_w);
    }
    UtteranceRecord r;
    r.utterance_id = Id("utt", i);
    r.speaker_id = Id("spk", i / 5);
    r.reference = "sample utterance number " + std::to_string(i);
    r.duration_s = std::round(duration(rng) * 100.0) / 100.0;
    r.profile = profile;
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

Fixture MakeDisparityFixture(const DisparitySpec& setup) {
  static const std::vector<std::string> languages = {"english", "spanish", "mandarin"};
  static const std::vector<std::string> ses = {"low", "medium", "high"};
  static const std::vector<std::string> ethnicities = {"group_a", "group_b", "group_c",
                                                       "group_d"};
  std::mt19937_64 rng(setup.seed);
  std::normal_distribution<double> speaker_effect(0.0, setup.sigma_u);
  std::uniform_int_distribution<int> length(5, 20);
  std::uniform_int_distribution<int> vocabulary(0, 39);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<size_t> pick3(0, 2);
  std::uniform_int_distribution<size_t> pick4(0, 3);

  Fixture fixture;
  fixture.corpus.provenance.source = "synthetic";
  std::string transcripts = "utterance_id,hypothesis\n";
  size_t next = 0;
  for (size_t s = 0; s < setup.speakers; ++s) {
    DemographicProfile profile;
    profile.gender = s % 2 == 0 ? "female" : "male";
    profile.first_language = languages[pick3(rng)];
    profile.socioeconomic_bkg = ses[pick3(rng)];
    profile.ethnicity = ethnicities[pick4(rng)];
    double rate = setup.base_rate * std::exp(speaker_effect(rng));
    if (profile.gender == setup.target_level) rate *= setup.disparity;
    rate = std::min(rate, 0.95);
    for (size_t k = 0; k < setup.utterances_per_speaker; ++k, ++next) {
      UtteranceRecord r;
      r.utterance_id = Id("utt", next);
      r.speaker_id = Id("spk", s);
      r.profile = profile;
      std::string reference, hypothesis;
      const int n = length(rng);
      for (int t = 0; t < n; ++t) {
        const std::string word = "w" + std::to_string(vocabulary(rng));
        const std::string heard = unit(rng) < rate ? "x" + word : word;
        reference += (t ? " " : "") + word;
        hypothesis += (t ? " " : "") + heard;
      }
      r.reference = reference;
      transcripts += csv::FormatRow({r.utterance_id, hypothesis});
      fixture.transcripts.Add(r.utterance_id, hypothesis);
      fixture.corpus.records.push_back(std::move(r));
    }
  }
  fixture.corpus_csv = FormatCorpusCsv(fixture.corpus);
  fixture.transcripts_csv = std::move(transcripts);
  return fixture;
}

std::string PerfectTranscriptsCsv(const Corpus& corpus) {
  std::string out = "utterance_id,hypothesis\n";
  for (const auto& r : corpus.records) out += csv::FormatRow({r.utterance_id, r.reference});
  return out;
}

TempDir::TempDir() {
  std::string pattern =
      (std::filesystem::temp_directory_path() / "fairaudit-test-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

std::filesystem::path TempDir::Write(const std::string& name,
                                     const std::string& bytes) const {
  const auto file = path_ / name;
  std::ofstream out(file, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return file;
}

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace fairaudit::testing
