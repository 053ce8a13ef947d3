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

// fairaudit: offline audits, corpus sampling and statistics, and the HTTP
// service.
//
// Exit status: 0 success, 1 runtime failure, 2 invalid input. Failures
// print one line to stderr:
//   error: code=<ErrorCode> message="<text>"

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "fairaudit/audit.h"
#include "fairaudit/audit_json.h"
#include "fairaudit/corpus.h"
#include "fairaudit/error.h"
#include "fairaudit/service.h"
#include "fairaudit/store.h"

namespace {

using namespace fairaudit;

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

// An input-stage failure: reported with its code, always exit 2.
struct InputError {
  Error error;
};

std::string Quote(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

void ReportError(std::string_view code, std::string_view message) {
  std::cerr << "error: code=" << code << " message=\"" << Quote(message) << "\"\n";
}

bool IsValidationCode(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedRow:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kUnknownAttribute:
    case ErrorCode::kEmptyReference:
    case ErrorCode::kMalformedTranscript:
    case ErrorCode::kSingleLevelAttribute:
    case ErrorCode::kCoverageTooLow:
    case ErrorCode::kInvalidModelId:
      return true;
    default:
      return false;
  }
}

template <typename F>
auto LoadInput(F&& load) {
  try {
    return load();
  } catch (const Error& e) {
    throw InputError{e};
  }
}

void WriteFile(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
}

std::string FormatFixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string FormatFaas(const FaasScore& faas) {
  switch (faas.status) {
    case FaasStatus::kPerfectAccuracy:
      return "+inf (perfect_accuracy)";
    case FaasStatus::kZeroFairness:
      return "-inf (zero_fairness)";
    case FaasStatus::kFinite:
      break;
  }
  return FormatFixed(faas.value, 2);
}

void PrintAudit(const AuditResult& r, std::ostream& out) {
  out << "model_id       " << r.model_id << "\n"
      << "utterances     " << r.scored_utterances << " / " << r.corpus_size
      << " (coverage " << FormatFixed(r.coverage, 4) << ")\n"
      << "WER            " << FormatFixed(r.corpus_wer, 4) << "\n"
      << "overall score  " << FormatFixed(r.overall_score, 2) << "\n"
      << "FAAS           " << FormatFaas(r.faas) << "\n"
      << "tier           " << TierLabel(r.tier) << "\n\n";

  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %6s %8s %10s %9s %8s  %s\n", "category",
                "levels", "score", "p-value", "adjusted", "weight", "tier");
  out << line;
  for (const auto& c : r.categories) {
    std::snprintf(line, sizeof(line), "%-18s %6zu %8.2f %10.4g %9.2f %8.2f  %s\n",
                  c.attribute.c_str(), c.groups.size(), c.category_score,
                  c.lrt.p_value, c.adjusted_score, c.weight,
                  std::string(TierLabel(c.tier)).c_str());
    out << line;
  }
  for (const auto& s : r.skipped_categories) {
    out << s.attribute << ": skipped (" << s.reason << ")\n";
  }
  for (const auto& c : r.categories) {
    out << "\n" << c.attribute << " (reference " << c.reference_level << ")\n";
    std::snprintf(line, sizeof(line), "  %-24s %7s %8s %9s %9s %8s %9s\n", "level", "n",
                  "share", "obs_wer", "beta", "pred_wer", "raw");
    out << line;
    for (const auto& g : c.groups) {
      std::snprintf(line, sizeof(line), "  %-24s %7zu %8.4f %9.4f %9.4f %8.4f %9.2f\n",
                    g.level.c_str(), g.count, g.proportion, g.observed_wer, g.beta,
                    g.predicted_wer, g.raw_score);
      out << line;
    }
  }
}

int RunAuditCommand(const std::string& corpus_path, const std::string& transcripts_path,
                    const std::string& model_id, const std::string& out_path,
                    const std::string& store_dir, AuditConfig config) {
  if (!IsValidModelId(model_id)) {
    throw InputError{Error(ErrorCode::kInvalidModelId,
                           "model_id must match [A-Za-z0-9._/-]{1,128}")};
  }
  const Corpus corpus = LoadInput(
      [&] { return LoadCorpus(corpus_path, {.normalize_text = config.normalize_text}); });
  const TranscriptTable transcripts =
      LoadInput([&] { return TranscriptTable::Load(transcripts_path); });
  const AuditResult result = RunAudit(corpus, transcripts, model_id, config);
  if (!out_path.empty()) WriteFile(out_path, SerializeAudit(result));
  if (!store_dir.empty()) {
    AuditStore store(store_dir);
    const StoredAudit stored = store.Save(result);
    std::cerr << "stored " << stored.model_id << " version " << stored.version << "\n";
  }
  PrintAudit(result, std::cout);
  return 0;
}

int RunSampleCommand(const std::string& corpus_path, double fraction, uint64_t seed,
                     const std::string& out_path) {
  const Corpus corpus = LoadInput([&] { return LoadCorpus(corpus_path); });
  const Corpus sample = StratifiedSample(corpus, fraction, seed);
  WriteFile(out_path, FormatCorpusCsv(sample));
  std::cout << "sampled " << sample.records.size() << " of " << corpus.records.size()
            << " records from " << CountStrata(corpus) << " strata\n";
  return 0;
}

int RunStatsCommand(const std::string& corpus_path, const std::string& compare_path,
                    std::optional<double> fraction, uint64_t seed) {
  const Corpus corpus = LoadInput([&] { return LoadCorpus(corpus_path); });
  const CorpusStats original = ComputeCorpusStats(corpus);
  std::optional<CorpusStats> sample;
  if (!compare_path.empty()) {
    sample = ComputeCorpusStats(LoadInput([&] { return LoadCorpus(compare_path); }));
  } else if (fraction) {
    sample = ComputeCorpusStats(StratifiedSample(corpus, *fraction, seed));
  }
  std::cout << FormatStatsTable(original, sample ? &*sample : nullptr);
  return 0;
}

int RunServeCommand(ServiceConfig config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  AuditService service(std::move(config));
  int port = 0;
  try {
    port = service.Bind();
  } catch (const Error& e) {
    ReportError(ErrorCodeName(e.code()), e.what());
    return kExitRuntime;
  }
  std::cerr << "listening on http://" << service.config().bind.host << ":" << port
            << " (corpus_loaded=" << (service.corpus_loaded() ? "true" : "false")
            << ")" << std::endl;

  std::thread waiter([&] {
    int received = 0;
    sigwait(&signals, &received);
    service.WaitUntilServing();
    service.Stop();
  });
  service.Serve();
  // Serve() also returns if listening fails; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.Stop();
  std::cerr << "shut down cleanly\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware evaluation of speech recognition transcripts"};
  app.require_subcommand(1);

  AuditConfig audit_config;
  std::string corpus_path, transcripts_path, model_id, out_path, store_dir;
  bool no_normalize = false;
  bool serial = false;
  auto* audit = app.add_subcommand("audit", "Audit one model's transcripts");
  audit->add_option("--corpus", corpus_path, "Reference corpus CSV")->required();
  audit->add_option("--transcripts", transcripts_path,
                    "Hypotheses CSV (utterance_id,hypothesis)")
      ->required();
  audit->add_option("--model-id", model_id, "Model identifier")->required();
  audit->add_option("--out", out_path, "Write the audit JSON here");
  audit->add_option("--store", store_dir, "Also save into this audit store");
  audit->add_option("--min-coverage", audit_config.min_coverage,
                    "Minimum fraction of corpus utterances with a hypothesis")
      ->check(CLI::Range(0.0, 1.0));
  audit->add_option("--min-level-size", audit_config.min_level_size,
                    "Levels with fewer utterances are merged");
  audit->add_option("--created-at", audit_config.created_at,
                    "Fixed RFC 3339 timestamp for the document");
  audit->add_flag("--no-normalize", no_normalize, "Compare raw whitespace tokens");
  audit->add_flag("--serial", serial, "Disable OpenMP kernels");

  double fraction = 0.1;
  uint64_t seed = 0;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draw a stratified sample");
  sample->add_option("--corpus", corpus_path, "Corpus CSV")->required();
  sample->add_option("--fraction", fraction, "Sampling fraction in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  sample->add_option("--seed", seed, "Random seed");
  sample->add_option("--out", sample_out, "Output CSV")->required();

  std::string compare_path;
  std::optional<double> stats_fraction;
  auto* stats = app.add_subcommand("stats", "Corpus size, duration and entropies");
  stats->add_option("--corpus", corpus_path, "Corpus CSV")->required();
  stats->add_option("--compare", compare_path, "Second corpus CSV (e.g. a sample)");
  stats->add_option("--fraction", stats_fraction, "Compare with a fresh sample")
      ->check(CLI::Range(0.0, 1.0));
  stats->add_option("--seed", seed, "Seed for --fraction");

  ServiceConfig service_config;
  std::string bind_text;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--corpus", corpus_path, "Reference corpus CSV");
  serve->add_option("--store", store_dir, "Audit store directory");
  serve->add_option("--bind", bind_text, "host:port");
  serve->add_option("--sample-fraction", service_config.sample_fraction,
                    "Audit against a stratified sample")
      ->check(CLI::Range(0.0, 1.0));
  serve->add_option("--seed", service_config.seed, "Seed for --sample-fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    ReportError("InvalidArgument", e.what());
    return kExitValidation;
  }

  try {
    if (*audit) {
      audit_config.normalize_text = !no_normalize;
      if (serial) audit_config.execution = kernels::Execution::kSerial;
      return RunAuditCommand(corpus_path, transcripts_path, model_id, out_path,
                             store_dir, audit_config);
    }
    if (*sample) {
      if (!(fraction > 0.0)) {
        throw InputError{Error(ErrorCode::kInvalidArgument, "--fraction must be > 0")};
      }
      return RunSampleCommand(corpus_path, fraction, seed, sample_out);
    }
    if (*stats) {
      if (stats_fraction && !(*stats_fraction > 0.0)) {
        throw InputError{Error(ErrorCode::kInvalidArgument, "--fraction must be > 0")};
      }
      return RunStatsCommand(corpus_path, compare_path, stats_fraction, seed);
    }
    if (*serve) {
      try {
        service_config.ApplyEnvironment();
        if (!corpus_path.empty()) service_config.corpus_path = corpus_path;
        if (!store_dir.empty()) service_config.store_dir = store_dir;
        if (!bind_text.empty()) service_config.bind = ParseBindAddress(bind_text);
      } catch (const Error& e) {
        throw InputError{e};
      }
      return RunServeCommand(std::move(service_config));
    }
  } catch (const InputError& e) {
    ReportError(ErrorCodeName(e.error.code()), e.error.what());
    return kExitValidation;
  } catch (const Error& e) {
    ReportError(ErrorCodeName(e.code()), e.what());
    return IsValidationCode(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    ReportError("Internal", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
