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

#include <chrono>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"

#include "fairaudit/error.h"
#include "support/simulate.h"

namespace fairaudit {
namespace {

using nlohmann::json;
using testing::TempDir;

class Harness {
 public:
  Harness(ServiceConfig config, std::optional<Corpus> corpus) {
    config.bind = {"127.0.0.1", 0};
    config.audit.created_at = "2026-04-01T00:00:00Z";
    service_ = corpus ? std::make_unique<AuditService>(config, std::move(*corpus))
                      : std::make_unique<AuditService>(config);
    port_ = service_->Bind();
    thread_ = std::thread([this] { service_->Serve(); });
    service_->WaitUntilServing();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  ~Harness() {
    service_->Stop();
    thread_.join();
  }

  AuditService& service() { return *service_; }
  httplib::Client& client() { return *client_; }

  httplib::Result Submit(const std::string& model_id, const std::string& csv,
                         const std::string& field = "transcripts") {
    httplib::MultipartFormDataItems items = {
        {"model_id", model_id, "", ""},
        {field, csv, "hyp.csv", "text/csv"},
    };
    return client_->Post("/api/submit", items);
  }

  json PollUntilFinished(const std::string& job_id) {
    for (int i = 0; i < 600; ++i) {
      auto res = client_->Get("/api/status/" + job_id);
      EXPECT_TRUE(res);
      if (!res) return {};
      const json doc = json::parse(res->body);
      if (doc["state"] == "done" || doc["state"] == "failed") return doc;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    ADD_FAILURE() << "job " << job_id << " never finished";
    return {};
  }

 private:
  std::unique_ptr<AuditService> service_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : fixture_(testing::MakeDisparityFixture({.speakers = 40, .seed = 77})) {
    config_.store_dir = dir_.path() / "store";
  }

  std::unique_ptr<Harness> Start() {
    return std::make_unique<Harness>(config_, fixture_.corpus);
  }

  TempDir dir_;
  testing::Fixture fixture_;
  ServiceConfig config_;
};

TEST_F(ServiceTest, SubmitPollAndFetch) {
  auto h = Start();
  auto res = h->Submit("org/model", fixture_.transcripts_csv);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202) << res->body;
  const std::string job_id = json::parse(res->body)["job_id"];
  const json status = h->PollUntilFinished(job_id);
  ASSERT_EQ(status["state"], "done") << status.dump();
  EXPECT_EQ(status["result_ref"], "org/model@1");
  EXPECT_DOUBLE_EQ(status["coverage"].get<double>(), 1.0);
  EXPECT_TRUE(status["error"].is_null());

  auto result = h->client().Get("/api/result/org/model");
  ASSERT_TRUE(result);
  ASSERT_EQ(result->status, 200);
  EXPECT_EQ(result->body, h->service().store().GetAuditJson("org/model"));
  EXPECT_EQ(json::parse(result->body)["model_id"], "org/model");

  auto plots = h->client().Get("/api/plots/org/model@1");
  ASSERT_TRUE(plots);
  ASSERT_EQ(plots->status, 200);
  EXPECT_EQ(json::parse(plots->body)["model_id"], "org/model");
}

TEST_F(ServiceTest, AlternateFileFieldName) {
  auto h = Start();
  auto res = h->Submit("m", fixture_.transcripts_csv, "file");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 202);
}

TEST_F(ServiceTest, ValidationErrorsAreImmediate) {
  auto h = Start();
  auto bad_header = h->Submit("m", "utterance_id,text\nu1,hello\n");
  ASSERT_TRUE(bad_header);
  EXPECT_EQ(bad_header->status, 400);
  EXPECT_EQ(json::parse(bad_header->body)["error_code"], "MalformedTranscript");

  auto bad_id = h->Submit("bad id", fixture_.transcripts_csv);
  ASSERT_TRUE(bad_id);
  EXPECT_EQ(bad_id->status, 400);
  EXPECT_EQ(json::parse(bad_id->body)["error_code"], "InvalidModelId");

  httplib::MultipartFormDataItems no_file = {{"model_id", "m", "", ""}};
  auto missing = h->client().Post("/api/submit", no_file);
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 400);

  auto not_multipart = h->client().Post("/api/submit", "{}", "application/json");
  ASSERT_TRUE(not_multipart);
  EXPECT_EQ(not_multipart->status, 400);
  EXPECT_EQ(h->service().QueueDepth(), 0u);
}

TEST_F(ServiceTest, OversizedPayloadIs413) {
  config_.max_payload_bytes = 4096;
  auto h = Start();
  auto res = h->Submit("m", fixture_.transcripts_csv + std::string(8192, '#'));
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 413);
}

TEST_F(ServiceTest, LowCoverageFailsWithFraction) {
  auto h = Start();
  std::string half = "utterance_id,hypothesis\n";
  for (size_t i = 0; i < fixture_.corpus.records.size(); i += 2) {
    half += fixture_.corpus.records[i].utterance_id + ",hello\n";
  }
  auto res = h->Submit("m", half);
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 202);
  const json status = h->PollUntilFinished(json::parse(res->body)["job_id"]);
  EXPECT_EQ(status["state"], "failed");
  EXPECT_EQ(status["error_code"], "CoverageTooLow");
  EXPECT_NEAR(status["coverage"].get<double>(), 0.5, 1e-12);
  EXPECT_TRUE(h->service().store().ListLeaderboard().empty());
}

TEST_F(ServiceTest, UnknownResourcesAre404) {
  auto h = Start();
  for (const char* path : {"/api/status/job-999999", "/api/result/nobody", "/api/plots/nobody",
                           "/api/result/nobody@2"}) {
    auto res = h->client().Get(path);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404) << path;
    EXPECT_EQ(json::parse(res->body)["error_code"], "NotFound") << path;
  }
}

TEST_F(ServiceTest, LeaderboardOrderingAndConditionalGet) {
  auto h = Start();
  auto empty = h->client().Get("/api/leaderboard");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 200);
  EXPECT_EQ(json::parse(empty->body), json::array());
  const std::string first_etag = empty->get_header_value("ETag");

  const auto perfect = testing::PerfectTranscriptsCsv(fixture_.corpus);
  const auto worse = testing::MakeDisparityFixture(
      {.speakers = 40, .base_rate = 0.3, .disparity = 3.0, .seed = 77});
  for (const auto& [id, csv] : std::vector<std::pair<std::string, std::string>>{
           {"worse", worse.transcripts_csv},
           {"planted", fixture_.transcripts_csv},
           {"perfect", perfect}}) {
    auto res = h->Submit(id, csv);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 202);
  }
  h->service().WaitIdle();

  auto board = h->client().Get("/api/leaderboard");
  ASSERT_TRUE(board);
  ASSERT_EQ(board->status, 200);
  EXPECT_EQ(board->get_header_value("Cache-Control"), "no-cache");
  const json doc = json::parse(board->body);
  ASSERT_EQ(doc.size(), 3u);
  EXPECT_EQ(doc[0]["model_id"], "perfect");
  EXPECT_EQ(doc[0]["faas_status"], "perfect_accuracy");
  EXPECT_GT(doc[1]["faas"].get<double>(), doc[2]["faas"].get<double>());
  EXPECT_EQ(doc[1]["model_id"], "planted");

  const std::string etag = board->get_header_value("ETag");
  EXPECT_NE(etag, first_etag);
  auto cached = h->client().Get("/api/leaderboard", {{"If-None-Match", etag}});
  ASSERT_TRUE(cached);
  EXPECT_EQ(cached->status, 304);
  EXPECT_TRUE(cached->body.empty());
  auto stale = h->client().Get("/api/leaderboard", {{"If-None-Match", first_etag}});
  ASSERT_TRUE(stale);
  EXPECT_EQ(stale->status, 200);
}

TEST_F(ServiceTest, ResubmissionServesLatestAndKeepsArchive) {
  auto h = Start();
  ASSERT_EQ(h->Submit("m", fixture_.transcripts_csv)->status, 202);
  ASSERT_EQ(h->Submit("m", testing::PerfectTranscriptsCsv(fixture_.corpus))->status, 202);
  h->service().WaitIdle();
  auto latest = h->client().Get("/api/result/m");
  ASSERT_TRUE(latest);
  EXPECT_DOUBLE_EQ(json::parse(latest->body)["wer"].get<double>(), 0.0);
  auto first = h->client().Get("/api/result/m@1");
  ASSERT_TRUE(first);
  EXPECT_GT(json::parse(first->body)["wer"].get<double>(), 0.0);
  const json board = json::parse(h->client().Get("/api/leaderboard")->body);
  ASSERT_EQ(board.size(), 1u);
  EXPECT_EQ(board[0]["version"], 2);
}

TEST_F(ServiceTest, PlotsNeedPerUtteranceDetail) {
  config_.audit.keep_per_utterance = false;
  auto h = Start();
  ASSERT_EQ(h->Submit("m", fixture_.transcripts_csv)->status, 202);
  h->service().WaitIdle();
  auto res = h->client().Get("/api/plots/m");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
}

TEST_F(ServiceTest, HealthReportsQueueDepth) {
  auto h = Start();
  auto idle = h->client().Get("/api/health");
  ASSERT_TRUE(idle);
  const json doc = json::parse(idle->body);
  EXPECT_EQ(doc["status"], "ok");
  EXPECT_EQ(doc["corpus_loaded"], true);
  EXPECT_EQ(doc["queue_depth"], 0);

  h->service().SetWorkerPausedForTesting(true);
  ASSERT_EQ(h->Submit("m", fixture_.transcripts_csv)->status, 202);
  EXPECT_EQ(json::parse(h->client().Get("/api/health")->body)["queue_depth"], 1);
  h->service().SetWorkerPausedForTesting(false);
  h->service().WaitIdle();
  EXPECT_EQ(json::parse(h->client().Get("/api/health")->body)["queue_depth"], 0);
}

TEST_F(ServiceTest, FullQueueIs429) {
  config_.max_queue_depth = 3;
  auto h = Start();
  h->service().SetWorkerPausedForTesting(true);
  for (int i = 0; i < 3; ++i) {
    ASSERT_EQ(h->Submit("m" + std::to_string(i), fixture_.transcripts_csv)->status, 202);
  }
  auto res = h->Submit("overflow", fixture_.transcripts_csv);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 429);
  EXPECT_EQ(json::parse(res->body)["error_code"], "QueueFull");
  h->service().SetWorkerPausedForTesting(false);
  h->service().WaitIdle();
  EXPECT_EQ(h->Submit("later", fixture_.transcripts_csv)->status, 202);
}

TEST_F(ServiceTest, JobsRunInSubmissionOrder) {
  auto h = Start();
  h->service().SetWorkerPausedForTesting(true);
  std::vector<std::string> jobs;
  for (int i = 0; i < 4; ++i) {
    jobs.push_back(json::parse(h->Submit("same", fixture_.transcripts_csv)->body)["job_id"]);
  }
  h->service().SetWorkerPausedForTesting(false);
  h->service().WaitIdle();
  for (int i = 0; i < 4; ++i) {
    const auto job = h->service().Job(jobs[i]);
    ASSERT_TRUE(job);
    EXPECT_EQ(job->result_ref, "same@" + std::to_string(i + 1));
  }
}

TEST(ServiceNoCorpusTest, StaysUpAndRefusesSubmissions) {
  TempDir dir;
  ServiceConfig config;
  config.store_dir = dir.path() / "store";
  config.corpus_path = (dir.path() / "absent.csv").string();
  Harness h(config, std::nullopt);
  EXPECT_FALSE(h.service().corpus_loaded());
  const json health = json::parse(h.client().Get("/api/health")->body);
  EXPECT_EQ(health["corpus_loaded"], false);
  auto res = h.Submit("m", "utterance_id,hypothesis\nu1,x\n");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(json::parse(res->body)["error_code"], "CorpusUnavailable");
  EXPECT_EQ(h.client().Get("/api/leaderboard")->status, 200);
}

TEST(ServiceSampleTest, AuditsRunOnStratifiedSample) {
  TempDir dir;
  const auto fixture = testing::MakeDisparityFixture({.speakers = 100, .seed = 5});
  ServiceConfig config;
  config.store_dir = dir.path() / "store";
  config.corpus_path = dir.Write("corpus.csv", fixture.corpus_csv).string();
  config.sample_fraction = 0.5;
  config.seed = 3;
  Harness h(config, std::nullopt);
  ASSERT_TRUE(h.service().corpus_loaded());
  ASSERT_EQ(h.Submit("m", fixture.transcripts_csv)->status, 202);
  h.service().WaitIdle();
  const AuditResult r = h.service().store().GetAudit("m");
  EXPECT_NEAR(double(r.scored_utterances), 0.5 * fixture.corpus.records.size(), 40.0);
  EXPECT_LT(r.scored_utterances, fixture.corpus.records.size());
}

TEST(BindAddressTest, Parsing) {
  EXPECT_EQ(ParseBindAddress("0.0.0.0:9000").host, "0.0.0.0");
  EXPECT_EQ(ParseBindAddress("0.0.0.0:9000").port, 9000);
  EXPECT_EQ(ParseBindAddress(":81").host, "127.0.0.1");
  EXPECT_EQ(ParseBindAddress("8081").port, 8081);
  EXPECT_THROW(ParseBindAddress("host:"), Error);
  EXPECT_THROW(ParseBindAddress("host:99999"), Error);
  EXPECT_THROW(ParseBindAddress("a:b"), Error);
}

TEST(ServiceConfigTest, EnvironmentOverrides) {
  setenv("FAIRAUDIT_CORPUS", "/tmp/c.csv", 1);
  setenv("FAIRAUDIT_STORE_DIR", "/tmp/s", 1);
  setenv("FAIRAUDIT_BIND", "0.0.0.0:7000", 1);
  setenv("FAIRAUDIT_SAMPLE_FRACTION", "0.25", 1);
  setenv("FAIRAUDIT_SEED", "42", 1);
  ServiceConfig config;
  config.ApplyEnvironment();
  EXPECT_EQ(config.corpus_path, "/tmp/c.csv");
  EXPECT_EQ(config.store_dir, "/tmp/s");
  EXPECT_EQ(config.bind.port, 7000);
  EXPECT_EQ(config.sample_fraction, 0.25);
  EXPECT_EQ(config.seed, 42u);
  setenv("FAIRAUDIT_SEED", "-3", 1);
  EXPECT_THROW(config.ApplyEnvironment(), Error);
  for (const char* v : {"FAIRAUDIT_CORPUS", "FAIRAUDIT_STORE_DIR", "FAIRAUDIT_BIND",
                        "FAIRAUDIT_SAMPLE_FRACTION", "FAIRAUDIT_SEED"}) {
    unsetenv(v);
  }
}

TEST(JobJsonTest, NullsForAbsentFields) {
  SubmissionJob job;
  job.job_id = "job-000001";
  job.model_id = "m";
  const json doc = ToJson(job);
  EXPECT_EQ(doc["state"], "queued");
  EXPECT_TRUE(doc["result_ref"].is_null());
  EXPECT_TRUE(doc["coverage"].is_null());
}

}  // namespace
}  // namespace fairaudit
