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

// HTTP front end for submitting transcripts and browsing audits.
//
//   POST /api/submit           multipart: model_id, transcripts (CSV file)
//   GET  /api/status/<job_id>
//   GET  /api/leaderboard      honours If-None-Match
//   GET  /api/result/<model_id>[@<version>]
//   GET  /api/plots/<model_id>[@<version>]
//   GET  /api/health
//
// Audits run on one background worker in submission order. The job table
// lives in memory only; jobs still queued at shutdown are dropped.

#ifndef FAIRAUDIT_SERVICE_H_
#define FAIRAUDIT_SERVICE_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"

#include "fairaudit/audit.h"
#include "fairaudit/corpus.h"
#include "fairaudit/store.h"

namespace httplib {
class Server;
}

namespace fairaudit {

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// "host:port", ":port" or "port". Port 0 asks the OS for a free port.
// Throws kInvalidArgument.
BindAddress ParseBindAddress(std::string_view text);

struct ServiceConfig {
  // Reference corpus. Absent or unreadable leaves the service up with
  // corpus_loaded = false and submissions answered with 503.
  std::string corpus_path;
  std::filesystem::path store_dir = "store";
  BindAddress bind;
  // Audits run on a stratified sample of the corpus when below 1.
  double sample_fraction = 1.0;
  uint64_t seed = 0;
  size_t max_queue_depth = 16;
  size_t max_payload_bytes = 64u << 20;
  AuditConfig audit;

  // Overrides fields from FAIRAUDIT_CORPUS, FAIRAUDIT_STORE_DIR,
  // FAIRAUDIT_BIND, FAIRAUDIT_SAMPLE_FRACTION and FAIRAUDIT_SEED when set.
  void ApplyEnvironment();
};

enum class JobState { kQueued, kRunning, kDone, kFailed };

std::string_view JobStateName(JobState state);

struct SubmissionJob {
  std::string job_id;
  std::string model_id;
  JobState state = JobState::kQueued;
  std::optional<std::string> error;
  std::optional<std::string> error_code;
  std::optional<double> coverage;
  std::optional<std::string> result_ref;  // "<model_id>@<version>"
  std::string submitted_at;
};

nlohmann::json ToJson(const SubmissionJob& job);

class AuditService {
 public:
  explicit AuditService(ServiceConfig config);
  // Preloaded evaluation corpus; `config.corpus_path` is ignored.
  AuditService(ServiceConfig config, Corpus corpus);
  ~AuditService();

  AuditService(const AuditService&) = delete;
  AuditService& operator=(const AuditService&) = delete;

  // Binds the listening socket and returns the bound port. Throws
  // kIoFailure when the address is unavailable.
  int Bind();
  // Serves until Stop(). Requires a successful Bind().
  void Serve();
  // Returns once Serve() is accepting connections.
  void WaitUntilServing() const;
  // Stops accepting requests, lets the running job finish and joins the
  // worker. Idempotent.
  void Stop();

  // The operations behind the HTTP routes.
  //
  // Validates and enqueues. Throws kInvalidModelId, kMalformedTranscript,
  // kCorpusUnavailable or kQueueFull.
  std::string Submit(const std::string& model_id, std::string_view transcript_csv);
  std::optional<SubmissionJob> Job(const std::string& job_id) const;
  // Queued plus running jobs.
  size_t QueueDepth() const;
  bool corpus_loaded() const { return corpus_.has_value(); }
  // Blocks until no job is queued or running.
  void WaitIdle();

  AuditStore& store() { return store_; }
  const ServiceConfig& config() const { return config_; }

  // While paused the worker leaves jobs queued.
  void SetWorkerPausedForTesting(bool paused);

 private:
  struct PendingJob;

  void InstallRoutes();
  void WorkerLoop();
  void RunJob(PendingJob& pending);

  ServiceConfig config_;
  std::optional<Corpus> corpus_;
  AuditStore store_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex mutex_;
  std::condition_variable work_ready_;
  std::condition_variable idle_;
  std::map<std::string, SubmissionJob> jobs_;
  std::deque<std::unique_ptr<PendingJob>> queue_;
  bool running_job_ = false;
  bool paused_ = false;
  bool stopping_ = false;
  uint64_t next_job_ = 1;
  std::thread worker_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_SERVICE_H_
