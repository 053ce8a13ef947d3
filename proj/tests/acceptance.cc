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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fairaudit/alignment.h"
#include "fairaudit/audit.h"
#include "fairaudit/corpus.h"
#include "fairaudit/error.h"
#include "fairaudit/fairness.h"
#include "fairaudit/glmm.h"
#include "fairaudit/service.h"
#include "support/oracles.h"
#include "support/process.h"
#include "support/simulate.h"

#include "httplib.h"

namespace fairaudit {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

std::vector<std::string> RandomTokens(std::mt19937_64& rng, int min_len, int max_len,
                                      int alphabet) {
  std::uniform_int_distribution<int> len(min_len, max_len), sym(0, alphabet - 1);
  std::vector<std::string> out(size_t(len(rng)));
  for (auto& t : out) t = std::string(1, char('a' + sym(rng)));
  return out;
}

Outcome WerOracle() {
  std::mt19937_64 rng(2026);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto ref = RandomTokens(rng, 1, 8, 4);
    const auto hyp = RandomTokens(rng, 0, 8, 4);
    if (Align(ref, hyp).errors() != testing::BruteForceEditDistance(ref, hyp)) ++mismatches;
  }
  const double secs = SecondsSince(start);
  return {mismatches == 0 && secs < 5.0,
          Fmt("1000 pairs, %d mismatches, %.3f s (limit 5 s)", mismatches, secs)};
}

Outcome Conservation() {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto ref = RandomTokens(rng, 1, 20, 6);
    const auto hyp = RandomTokens(rng, 0, 20, 6);
    const AlignmentCounts c = Align(ref, hyp);
    if (c.reference_length != int64_t(ref.size()) ||
        c.substitutions + c.deletions + c.matches != int64_t(ref.size()) ||
        c.substitutions + c.insertions + c.matches != int64_t(hyp.size())) {
      ++violations;
    }
  }
  return {violations == 0, Fmt("10000 pairs, %d violations", violations)};
}

Outcome GlmmRecovery() {
  testing::GlmmSimulation sim;  // 500 x 5, beta0 -2, effect 0.3, sigma 0.5, N in 5..20
  sim.seed = 12;
  const auto utts = testing::SimulateGlmm(sim);
  const auto start = Clock::now();
  const Design design = BuildDesign(utts, {});
  const FittedModel m = FitPoissonGlmm(design);
  const double secs = SecondsSince(start);
  // The generator has no length effect beyond the offset: beta_logref = 0.
  const double e0 = std::abs(m.beta0 - sim.beta0);
  const double e1 = std::abs(m.beta_g.at("male") - sim.effect);
  const double e2 = std::abs(m.beta_logref);
  const double es = std::abs(m.sigma_u - sim.sigma_u);

  const FittedModel glm = FitPoissonGlmmAtSigma(design, 0.0);
  const auto oracle = testing::PoissonGlmIrls(design.x, design.response, design.offset);
  const double slice = (glm.coefficients - oracle.beta).cwiseAbs().maxCoeff();
  const double slice_ll = std::abs(glm.loglik - oracle.loglik);

  const bool pass = e0 <= 0.1 && e1 <= 0.1 && e2 <= 0.1 && es <= 0.15 && m.converged &&
                    secs < 60.0 && oracle.converged && slice < 1e-6 && slice_ll < 1e-6;
  return {pass, Fmt("|d beta0|=%.4f |d effect|=%.4f |beta_logref|=%.4f |d sigma|=%.4f "
                    "converged=%d %.2f s; sigma=0 slice vs GLM: coef %.2e loglik %.2e",
                    e0, e1, e2, es, int(m.converged), secs, slice, slice_ll)};
}

Outcome LrtCalibration() {
  std::vector<double> p;
  for (uint64_t rep = 0; rep < 200; ++rep) {
    testing::GlmmSimulation sim;
    sim.speakers = 100;
    sim.effect = 0.0;
    sim.seed = 10000 + rep;
    const Design full = BuildDesign(testing::SimulateGlmm(sim), {});
    const LrtResult lrt =
        Lrt(FitPoissonGlmm(full), FitPoissonGlmm(DropAttribute(full)), full.attribute_df());
    if (lrt.df != 1) return {false, "unexpected df"};
    p.push_back(lrt.p_value);
  }
  const double ks = testing::KsDistanceToUniform(p);
  return {ks < 0.1, Fmt("200 null replications (100 speakers x 5), KS = %.4f (limit 0.1)", ks)};
}

Outcome Cascade() {
  const double f1 = Faas(50, 0.5).value, f2 = Faas(100, 0.01).value;
  const double adj = AdjustedScore(80, 0.025);
  const LevelValues raw = RawFairnessScores({{"a", 0.08}, {"b", 0.11}, {"c", 0.19}});
  const bool pass = std::abs(f1 - 20.0) <= 1e-9 && std::abs(f2 - 40.0) <= 1e-9 && adj == 40.0 &&
                    raw.at("a") == 100.0 && raw.at("c") == 0.0;
  return {pass, Fmt("faas(50,0.5)=%.12f faas(100,0.01)=%.12f adjusted(80,0.025)=%.17g "
                    "raw endpoints {%g, %g}",
                    f1, f2, adj, raw.at("a"), raw.at("c"))};
}

Outcome SamplingFidelity() {
  const Corpus corpus = testing::MakeTableOneCorpus(26471, 1);
  const Corpus sample = StratifiedSample(corpus, 0.1, 1);
  const size_t strata = CountStrata(corpus);
  const double size_dev = std::abs(double(sample.records.size()) - 2647.0);
  double worst = 0.0;
  std::string per;
  for (Attribute a : {Attribute::kGender, Attribute::kFirstLanguage,
                      Attribute::kSocioeconomicBkg, Attribute::kEthnicity}) {
    std::vector<std::string> full_labels, sample_labels;
    for (const auto& r : corpus.records) full_labels.emplace_back(r.profile.Get(a));
    for (const auto& r : sample.records) sample_labels.emplace_back(r.profile.Get(a));
    const double h_full = testing::EntropyBits(full_labels);
    const double h_sample = testing::EntropyBits(sample_labels);
    if (std::abs(h_full - Entropy(corpus, a)) > 1e-12) return {false, "entropy mismatch"};
    const double delta = std::abs(h_full - h_sample);
    worst = std::max(worst, delta);
    per += Fmt(" %s %.4f->%.4f", std::string(AttributeName(a)).c_str(), h_full, h_sample);
  }
  return {size_dev <= double(strata) && worst <= 0.02,
          Fmt("size %zu (target 2647 +/- %zu strata), max entropy delta %.4f bits;", 
              sample.records.size(), strata, worst) + per};
}

const CategoryReport& Gender(const AuditResult& r) {
  for (const auto& c : r.categories) {
    if (c.attribute == "gender") return c;
  }
  throw Error(ErrorCode::kNotFound, "no gender category");
}

Outcome DisparityDetection() {
  AuditConfig config;
  config.created_at = "2026-01-01T00:00:00Z";
  const auto planted = testing::MakeDisparityFixture({.disparity = 1.5, .seed = 101});
  const AuditResult r = RunAudit(planted.corpus, planted.transcripts, "planted", config);
  const CategoryReport& g = Gender(r);
  int control_ok = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto control = testing::MakeDisparityFixture({.disparity = 1.0, .seed = 500 + seed});
    const AuditResult c = RunAudit(control.corpus, control.transcripts, "control", config);
    if (Gender(c).lrt.p_value >= 0.05) ++control_ok;
  }
  const bool pass =
      g.lrt.p_value < 0.05 && g.adjusted_score < g.category_score && control_ok >= 18;
  return {pass, Fmt("planted p=%.3g adjusted %.2f < category %.2f; control p>=0.05 in %d/20 "
                    "(need 18)",
                    g.lrt.p_value, g.adjusted_score, g.category_score, control_ok)};
}

Outcome CliDeterminism() {
  testing::TempDir dir;
  const auto fixture = testing::MakeDisparityFixture({.seed = 33});
  const std::string corpus = dir.Write("corpus.csv", fixture.corpus_csv).string();
  const std::string hyp = dir.Write("hyp.csv", fixture.transcripts_csv).string();
  std::vector<json> docs;
  for (const char* name : {"a.json", "b.json"}) {
    const std::string out = (dir.path() / name).string();
    const auto r = testing::RunProcess({FAIRAUDIT_CLI_PATH, "audit", "--corpus", corpus,
                                        "--transcripts", hyp, "--model-id", "m", "--out", out});
    if (r.exit_code != 0) return {false, "fairaudit audit exited " + std::to_string(r.exit_code)};
    json doc = json::parse(testing::ReadAll(out));
    doc.erase("created_at");
    docs.push_back(std::move(doc));
  }
  const std::string a = docs[0].dump(), b = docs[1].dump();
  return {a == b, Fmt("two runs, %zu bytes each, identical=%d", a.size(), int(a == b))};
}

Outcome ServiceRoundTrip() {
  testing::TempDir dir;
  const auto base = testing::MakeDisparityFixture({.speakers = 60, .seed = 41});
  const auto noisy = testing::MakeDisparityFixture(
      {.speakers = 60, .base_rate = 0.2, .disparity = 2.0, .seed = 41});
  const auto fair = testing::MakeDisparityFixture(
      {.speakers = 60, .base_rate = 0.05, .disparity = 1.0, .seed = 41});
  ServiceConfig config;
  config.store_dir = dir.path() / "store";
  config.bind = {"127.0.0.1", 0};
  AuditService service(config, base.corpus);
  const int port = service.Bind();
  std::thread server([&] { service.Serve(); });
  service.WaitUntilServing();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(120, 0);

  auto finish = [&](Outcome o) {
    service.Stop();
    server.join();
    return o;
  };
  auto submit = [&](const std::string& id, const std::string& csv) -> std::string {
    httplib::MultipartFormDataItems items = {{"model_id", id, "", ""},
                                             {"transcripts", csv, "h.csv", "text/csv"}};
    auto res = client.Post("/api/submit", items);
    if (!res || res->status != 202) return {};
    return json::parse(res->body)["job_id"];
  };
  auto poll = [&](const std::string& job) -> json {
    for (int i = 0; i < 2400; ++i) {
      auto res = client.Get("/api/status/" + job);
      if (!res) return {};
      json doc = json::parse(res->body);
      if (doc["state"] == "done" || doc["state"] == "failed") return doc;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return {};
  };

  for (const auto& [id, csv] : std::vector<std::pair<std::string, std::string>>{
           {"noisy", noisy.transcripts_csv},
           {"base", base.transcripts_csv},
           {"fair", fair.transcripts_csv}}) {
    const std::string job = submit(id, csv);
    if (job.empty()) return finish({false, "submit " + id + " rejected"});
    const json status = poll(job);
    if (status.is_null() || status["state"] != "done") {
      return finish({false, "job for " + id + " did not complete: " + status.dump()});
    }
  }
  auto board_res = client.Get("/api/leaderboard");
  if (!board_res || board_res->status != 200) return finish({false, "leaderboard unavailable"});
  const json board = json::parse(board_res->body);
  bool sorted = board.size() == 3;
  std::string order;
  for (size_t i = 0; i < board.size(); ++i) {
    order += board[i]["model_id"].get<std::string>() +
             Fmt("(%.2f) ", board[i]["faas"].get<double>());
    if (i > 0 && board[i - 1]["faas"].get<double>() < board[i]["faas"].get<double>()) {
      sorted = false;
    }
    const auto stored = service.store().GetAudit(board[i]["model_id"].get<std::string>());
    if (std::abs(stored.faas.value - board[i]["faas"].get<double>()) > 1e-12) sorted = false;
  }

  // Fault injection: a crash between temp write and rename.
  const std::string etag = board_res->get_header_value("ETag");
  const std::string before = service.store().GetAuditJson("base");
  service.store().SetBeforeRenameHookForTesting([](const std::filesystem::path& temp) {
    std::filesystem::remove(temp);
    throw std::runtime_error("injected crash");
  });
  const json crashed = poll(submit("base", fair.transcripts_csv));
  service.store().SetBeforeRenameHookForTesting(nullptr);
  auto after = client.Get("/api/leaderboard", {{"If-None-Match", etag}});
  const bool intact = crashed["state"] == "failed" && crashed["error_code"] == "IoFailure" &&
                      after && after->status == 304 &&
                      service.store().GetAuditJson("base") == before &&
                      service.store().ListVersions("base") == std::vector<int>{1};
  return finish({sorted && intact, "leaderboard " + order +
                                       Fmt("sorted=%d; fault injection intact=%d", int(sorted),
                                           int(intact))});
}

}  // namespace
}  // namespace fairaudit

int main() {
  using fairaudit::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"wer_oracle_equivalence", fairaudit::WerOracle},
      {"alignment_conservation", fairaudit::Conservation},
      {"glmm_parameter_recovery", fairaudit::GlmmRecovery},
      {"lrt_calibration", fairaudit::LrtCalibration},
      {"scoring_cascade", fairaudit::Cascade},
      {"sampling_fidelity", fairaudit::SamplingFidelity},
      {"disparity_detection", fairaudit::DisparityDetection},
      {"cli_determinism", fairaudit::CliDeterminism},
      {"service_round_trip", fairaudit::ServiceRoundTrip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
