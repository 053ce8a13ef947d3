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

#include "fairaudit/service.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "httplib.h"

#include "fairaudit/audit_json.h"
#include "fairaudit/error.h"
#include "fairaudit/plots.h"

namespace fairaudit {

using nlohmann::json;

namespace {

constexpr const char* kJsonType = "application/json";

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJsonType);
}

void SendError(httplib::Response& res, int status, const Error& e) {
  json body = {{"error", e.what()},
               {"error_code", std::string(ErrorCodeName(e.code()))}};
  if (e.value()) body["value"] = *e.value();
  SendJson(res, status, body);
}

void SendError(httplib::Response& res, int status, std::string_view code,
               const std::string& message) {
  SendJson(res, status, {{"error", message}, {"error_code", std::string(code)}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kQueueFull:
      return 429;
    case ErrorCode::kCorpusUnavailable:
      return 503;
    case ErrorCode::kCoverageTooLow:
      return 422;
    case ErrorCode::kIoFailure:
      return 500;
    default:
      return 400;
  }
}

const char* Getenv(const char* name) {
  const char* value = std::getenv(name);
  return value != nullptr && *value != '\0' ? value : nullptr;
}

}  // namespace

BindAddress ParseBindAddress(std::string_view text) {
  BindAddress address;
  std::string_view port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) address.host = std::string(text.substr(0, colon));
    port_text = text.substr(colon + 1);
  }
  int port = -1;
  const auto [end, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || end != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad bind address '" + std::string(text) + "'");
  }
  address.port = port;
  return address;
}

void ServiceConfig::ApplyEnvironment() {
  if (const char* v = Getenv("FAIRAUDIT_CORPUS")) corpus_path = v;
  if (const char* v = Getenv("FAIRAUDIT_STORE_DIR")) store_dir = v;
  if (const char* v = Getenv("FAIRAUDIT_BIND")) bind = ParseBindAddress(v);
  if (const char* v = Getenv("FAIRAUDIT_SAMPLE_FRACTION")) {
    char* end = nullptr;
    const double fraction = std::strtod(v, &end);
    if (*end != '\0' || !(fraction > 0.0 && fraction <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("FAIRAUDIT_SAMPLE_FRACTION must be in (0, 1], got ") + v);
    }
    sample_fraction = fraction;
  }
  if (const char* v = Getenv("FAIRAUDIT_SEED")) {
    std::string_view text(v);
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("FAIRAUDIT_SEED must be an unsigned integer, got ") + v);
    }
  }
}

std::string_view JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kFailed:
      return "failed";
  }
  return "unknown";
}

json ToJson(const SubmissionJob& job) {
  json doc = {{"job_id", job.job_id},
              {"model_id", job.model_id},
              {"state", std::string(JobStateName(job.state))},
              {"error", nullptr},
              {"error_code", nullptr},
              {"coverage", nullptr},
              {"result_ref", nullptr},
              {"submitted_at", job.submitted_at}};
  if (job.error) doc["error"] = *job.error;
  if (job.error_code) doc["error_code"] = *job.error_code;
  if (job.coverage) doc["coverage"] = *job.coverage;
  if (job.result_ref) doc["result_ref"] = *job.result_ref;
  return doc;
}

struct AuditService::PendingJob {
  std::string job_id;
  std::string model_id;
  TranscriptTable transcripts;
};

AuditService::AuditService(ServiceConfig config)
    : config_(std::move(config)), store_(config_.store_dir) {
  if (!config_.corpus_path.empty()) {
    try {
      Corpus corpus = LoadCorpus(config_.corpus_path,
                                 {.normalize_text = config_.audit.normalize_text});
      if (config_.sample_fraction < 1.0) {
        corpus = StratifiedSample(corpus, config_.sample_fraction, config_.seed);
      }
      corpus_ = std::move(corpus);
    } catch (const Error& e) {
      std::cerr << "warning: corpus not loaded: " << e.what() << "\n";
    }
  }
  InstallRoutes();
  worker_ = std::thread([this] { WorkerLoop(); });
}

AuditService::AuditService(ServiceConfig config, Corpus corpus)
    : config_(std::move(config)), corpus_(std::move(corpus)), store_(config_.store_dir) {
  InstallRoutes();
  worker_ = std::thread([this] { WorkerLoop(); });
}

AuditService::~AuditService() { Stop(); }

int AuditService::Bind() {
  const auto& [host, port] = config_.bind;
  int bound = -1;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kIoFailure,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void AuditService::Serve() { server_->listen_after_bind(); }

void AuditService::WaitUntilServing() const { server_->wait_until_ready(); }

void AuditService::Stop() {
  server_->stop();
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && !worker_.joinable()) return;
    stopping_ = true;
  }
  work_ready_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::string AuditService::Submit(const std::string& model_id,
                                 std::string_view transcript_csv) {
  if (!IsValidModelId(model_id)) {
    throw Error(ErrorCode::kInvalidModelId,
                "model_id must match [A-Za-z0-9._/-]{1,128}");
  }
  if (!corpus_) {
    throw Error(ErrorCode::kCorpusUnavailable, "no reference corpus loaded");
  }
  auto pending = std::make_unique<PendingJob>();
  pending->model_id = model_id;
  pending->transcripts = TranscriptTable::Parse(transcript_csv);

  std::lock_guard lock(mutex_);
  if (stopping_) {
    throw Error(ErrorCode::kCorpusUnavailable, "service is shutting down");
  }
  const size_t depth = queue_.size() + (running_job_ ? 1 : 0);
  if (depth >= config_.max_queue_depth) {
    throw Error(ErrorCode::kQueueFull,
                "job queue is full (" + std::to_string(depth) + " jobs)");
  }
  char id[24];
  std::snprintf(id, sizeof(id), "job-%06llu",
                static_cast<unsigned long long>(next_job_++));
  pending->job_id = id;
  SubmissionJob job;
  job.job_id = id;
  job.model_id = model_id;
  job.submitted_at = NowRfc3339();
  jobs_.emplace(job.job_id, std::move(job));
  queue_.push_back(std::move(pending));
  work_ready_.notify_one();
  return id;
}

std::optional<SubmissionJob> AuditService::Job(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

size_t AuditService::QueueDepth() const {
  std::lock_guard lock(mutex_);
  return queue_.size() + (running_job_ ? 1 : 0);
}

void AuditService::WaitIdle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return queue_.empty() && !running_job_; });
}

void AuditService::SetWorkerPausedForTesting(bool paused) {
  {
    std::lock_guard lock(mutex_);
    paused_ = paused;
  }
  work_ready_.notify_all();
}

void AuditService::WorkerLoop() {
  for (;;) {
    std::unique_ptr<PendingJob> pending;
    {
      std::unique_lock lock(mutex_);
      work_ready_.wait(lock,
                       [this] { return stopping_ || (!paused_ && !queue_.empty()); });
      if (stopping_) {
        queue_.clear();
        idle_.notify_all();
        return;
      }
      pending = std::move(queue_.front());
      queue_.pop_front();
      running_job_ = true;
      jobs_.at(pending->job_id).state = JobState::kRunning;
    }
    RunJob(*pending);
    {
      std::lock_guard lock(mutex_);
      running_job_ = false;
      if (queue_.empty()) idle_.notify_all();
    }
  }
}

void AuditService::RunJob(PendingJob& pending) {
  SubmissionJob outcome;
  try {
    const AuditResult result =
        RunAudit(*corpus_, pending.transcripts, pending.model_id, config_.audit);
    const StoredAudit stored = store_.Save(result);
    outcome.state = JobState::kDone;
    outcome.coverage = result.coverage;
    outcome.result_ref = stored.model_id + "@" + std::to_string(stored.version);
  } catch (const Error& e) {
    outcome.state = JobState::kFailed;
    outcome.error = e.what();
    outcome.error_code = std::string(ErrorCodeName(e.code()));
    if (e.code() == ErrorCode::kCoverageTooLow) outcome.coverage = e.value();
  } catch (const std::exception& e) {
    outcome.state = JobState::kFailed;
    outcome.error = e.what();
    outcome.error_code = "Internal";
  }
  std::lock_guard lock(mutex_);
  SubmissionJob& job = jobs_.at(pending.job_id);
  job.state = outcome.state;
  job.error = std::move(outcome.error);
  job.error_code = std::move(outcome.error_code);
  job.coverage = outcome.coverage;
  job.result_ref = std::move(outcome.result_ref);
}

void AuditService::InstallRoutes() {
  server_ = std::make_unique<httplib::Server>();
  server_->set_payload_max_length(config_.max_payload_bytes);

  server_->Post("/api/submit", [this](const httplib::Request& req,
                                      httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      SendError(res, 400, "InvalidArgument", "expected multipart/form-data");
      return;
    }
    if (!req.has_file("model_id")) {
      SendError(res, 400, "InvalidArgument", "missing field 'model_id'");
      return;
    }
    const char* file_field = req.has_file("transcripts") ? "transcripts"
                             : req.has_file("file")      ? "file"
                                                         : nullptr;
    if (file_field == nullptr) {
      SendError(res, 400, "InvalidArgument", "missing file field 'transcripts'");
      return;
    }
    try {
      const std::string job_id = Submit(req.get_file_value("model_id").content,
                                        req.get_file_value(file_field).content);
      SendJson(res, 202, {{"job_id", job_id}});
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), e);
    }
  });

  server_->Get(R"(/api/status/([^/]+))", [this](const httplib::Request& req,
                                                httplib::Response& res) {
    const auto job = Job(req.matches[1]);
    if (!job) {
      SendError(res, 404, "NotFound", "unknown job '" + req.matches[1].str() + "'");
      return;
    }
    SendJson(res, 200, ToJson(*job));
  });

  server_->Get("/api/leaderboard", [this](const httplib::Request& req,
                                          httplib::Response& res) {
    try {
      const std::string bytes = store_.IndexBytes();
      const std::string etag = EtagFor(bytes);
      res.set_header("ETag", etag);
      res.set_header("Cache-Control", "no-cache");
      if (req.get_header_value("If-None-Match") == etag) {
        res.status = 304;
        return;
      }
      SendJson(res, 200, LeaderboardToJson(ParseLeaderboard(bytes)));
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), e);
    }
  });

  server_->Get(R"(/api/result/(.+))", [this](const httplib::Request& req,
                                             httplib::Response& res) {
    try {
      res.status = 200;
      res.set_content(store_.GetAuditJson(req.matches[1]), kJsonType);
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), e);
    }
  });

  server_->Get(R"(/api/plots/(.+))", [this](const httplib::Request& req,
                                            httplib::Response& res) {
    AuditResult result;
    try {
      result = store_.GetAudit(req.matches[1]);
    } catch (const Error& e) {
      SendError(res, StatusFor(e.code()), e);
      return;
    }
    if (!result.per_utterance) {
      SendError(res, 409, "NotFound",
                "audit '" + result.model_id + "' kept no per-utterance detail");
      return;
    }
    SendJson(res, 200, PlotsToJson(result.model_id, BuildPlots(result)));
  });

  server_->Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200,
             {{"status", "ok"},
              {"corpus_loaded", corpus_loaded()},
              {"queue_depth", QueueDepth()}});
  });
}

}  // namespace fairaudit
