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

#include "fairaudit/audit_json.h"

#include <limits>

#include "fairaudit/error.h"

namespace fairaudit {

using nlohmann::json;

namespace {

json CountsToJson(const AlignmentCounts& c) {
  return {{"S", c.substitutions}, {"D", c.deletions}, {"I", c.insertions},
          {"C", c.matches},       {"N", c.reference_length}};
}

AlignmentCounts CountsFromJson(const json& doc) {
  AlignmentCounts c;
  c.substitutions = doc.at("S").get<int64_t>();
  c.deletions = doc.at("D").get<int64_t>();
  c.insertions = doc.at("I").get<int64_t>();
  c.matches = doc.at("C").get<int64_t>();
  c.reference_length = doc.at("N").get<int64_t>();
  return c;
}

json ProfileToJson(const DemographicProfile& p) {
  json doc = {{"gender", p.gender},
              {"first_language", p.first_language},
              {"socioeconomic_bkg", p.socioeconomic_bkg},
              {"ethnicity", p.ethnicity},
              {"age_band", nullptr}};
  if (p.age_band) doc["age_band"] = *p.age_band;
  return doc;
}

DemographicProfile ProfileFromJson(const json& doc) {
  DemographicProfile p;
  p.gender = doc.at("gender").get<std::string>();
  p.first_language = doc.at("first_language").get<std::string>();
  p.socioeconomic_bkg = doc.at("socioeconomic_bkg").get<std::string>();
  p.ethnicity = doc.at("ethnicity").get<std::string>();
  if (doc.contains("age_band") && !doc.at("age_band").is_null()) {
    p.age_band = doc.at("age_band").get<std::string>();
  }
  return p;
}

json UtteranceToJson(const AuditedUtterance& u) {
  json doc = CountsToJson(u.counts);
  doc["utterance_id"] = u.utterance_id;
  doc["speaker_id"] = u.speaker_id;
  doc["profile"] = ProfileToJson(u.profile);
  doc["wer"] = u.wer();
  return doc;
}

AuditedUtterance UtteranceFromJson(const json& doc) {
  AuditedUtterance u;
  u.utterance_id = doc.at("utterance_id").get<std::string>();
  u.speaker_id = doc.at("speaker_id").get<std::string>();
  u.profile = ProfileFromJson(doc.at("profile"));
  u.counts = CountsFromJson(doc);
  return u;
}

}  // namespace

json ToJson(const FittedModel& model) {
  json beta = json::object();
  for (const auto& [level, coefficient] : model.beta_g) beta[level] = coefficient;
  std::vector<double> coefficients(model.coefficients.data(),
                                   model.coefficients.data() +
                                       model.coefficients.size());
  return {{"beta0", model.beta0},
          {"beta", beta},
          {"beta_logref", model.beta_logref},
          {"sigma_u", model.sigma_u},
          {"loglik", model.loglik},
          {"converged", model.converged},
          {"n_iter", model.n_iter},
          {"reference_level", model.reference_level},
          {"inner_iterations", model.inner_iterations},
          {"gradient_norm", model.gradient_norm},
          {"columns", model.column_names},
          {"coefficients", coefficients}};
}

FittedModel FittedModelFromJson(const json& doc) {
  FittedModel model;
  model.beta0 = doc.at("beta0").get<double>();
  for (const auto& [level, value] : doc.at("beta").items()) {
    model.beta_g[level] = value.get<double>();
  }
  model.beta_logref = doc.at("beta_logref").get<double>();
  model.sigma_u = doc.at("sigma_u").get<double>();
  model.loglik = doc.at("loglik").get<double>();
  model.converged = doc.at("converged").get<bool>();
  model.n_iter = doc.at("n_iter").get<int>();
  model.reference_level = doc.value("reference_level", "");
  model.inner_iterations = doc.value("inner_iterations", 0);
  model.gradient_norm = doc.value("gradient_norm", 0.0);
  model.column_names = doc.value("columns", std::vector<std::string>{});
  const auto coefficients = doc.value("coefficients", std::vector<double>{});
  model.coefficients = Eigen::Map<const Eigen::VectorXd>(
      coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
  return model;
}

json ToJson(const CategoryReport& report) {
  json groups = json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"level", g.level},
                      {"n", g.count},
                      {"proportion", g.proportion},
                      {"observed_wer", g.observed_wer},
                      {"beta", g.beta},
                      {"predicted_wer", g.predicted_wer},
                      {"raw_score", g.raw_score}});
  }
  json doc = {{"attribute", report.attribute},
              {"reference_level", report.reference_level},
              {"groups", groups},
              {"merged_levels", report.merged_levels},
              {"xbar", report.xbar},
              {"category_score", report.category_score},
              {"lrt",
               {{"stat", report.lrt.stat},
                {"raw_stat", report.lrt.raw_stat},
                {"df", report.lrt.df},
                {"p_value", report.lrt.p_value}}},
              {"adjusted_score", report.adjusted_score},
              {"tier", TierLabel(report.tier)},
              {"weight", report.weight}};
  if (report.full_model) doc["model_full"] = ToJson(*report.full_model);
  if (report.reduced_model) doc["model_reduced"] = ToJson(*report.reduced_model);
  return doc;
}

CategoryReport CategoryReportFromJson(const json& doc) {
  CategoryReport report;
  report.attribute = doc.at("attribute").get<std::string>();
  report.reference_level = doc.at("reference_level").get<std::string>();
  for (const auto& g : doc.at("groups")) {
    GroupRow row;
    row.level = g.at("level").get<std::string>();
    row.count = g.at("n").get<size_t>();
    row.proportion = g.at("proportion").get<double>();
    row.observed_wer = g.at("observed_wer").get<double>();
    row.beta = g.at("beta").get<double>();
    row.predicted_wer = g.at("predicted_wer").get<double>();
    row.raw_score = g.at("raw_score").get<double>();
    report.groups.push_back(std::move(row));
  }
  report.merged_levels = doc.at("merged_levels").get<std::vector<std::string>>();
  report.xbar = doc.at("xbar").get<double>();
  report.category_score = doc.at("category_score").get<double>();
  const json& lrt = doc.at("lrt");
  report.lrt.stat = lrt.at("stat").get<double>();
  report.lrt.raw_stat = lrt.at("raw_stat").get<double>();
  report.lrt.df = lrt.at("df").get<int>();
  report.lrt.p_value = lrt.at("p_value").get<double>();
  report.adjusted_score = doc.at("adjusted_score").get<double>();
  report.tier = ParseTier(doc.at("tier").get<std::string>());
  report.weight = doc.at("weight").get<double>();
  if (doc.contains("model_full")) {
    report.full_model = FittedModelFromJson(doc.at("model_full"));
  }
  if (doc.contains("model_reduced")) {
    report.reduced_model = FittedModelFromJson(doc.at("model_reduced"));
  }
  return report;
}

json ToJson(const AuditResult& result) {
  json categories = json::array();
  for (const auto& c : result.categories) categories.push_back(ToJson(c));
  json skipped = json::array();
  for (const auto& s : result.skipped_categories) {
    skipped.push_back({{"attribute", s.attribute}, {"reason", s.reason}});
  }
  json doc = {{"model_id", result.model_id},
              {"wer", result.corpus_wer},
              {"faas", nullptr},
              {"faas_status", FaasStatusName(result.faas.status)},
              {"overall_score", result.overall_score},
              {"tier", TierLabel(result.tier)},
              {"categories", categories},
              {"skipped_categories", skipped},
              {"totals", CountsToJson(result.totals)},
              {"corpus_size", result.corpus_size},
              {"scored_utterances", result.scored_utterances},
              {"coverage", result.coverage},
              {"missing_hypotheses", result.missing_hypotheses},
              {"unmatched_transcripts", result.unmatched_transcripts},
              {"created_at", result.created_at}};
  if (result.faas.finite()) doc["faas"] = result.faas.value;
  if (result.per_utterance) {
    json rows = json::array();
    for (const auto& u : *result.per_utterance) rows.push_back(UtteranceToJson(u));
    doc["per_utterance"] = std::move(rows);
  }
  return doc;
}

AuditResult AuditResultFromJson(const json& doc) {
  try {
    AuditResult result;
    result.model_id = doc.at("model_id").get<std::string>();
    result.corpus_wer = doc.at("wer").get<double>();
    result.faas.status = ParseFaasStatus(doc.at("faas_status").get<std::string>());
    switch (result.faas.status) {
      case FaasStatus::kFinite:
        result.faas.value = doc.at("faas").get<double>();
        break;
      case FaasStatus::kPerfectAccuracy:
        result.faas.value = std::numeric_limits<double>::infinity();
        break;
      case FaasStatus::kZeroFairness:
        result.faas.value = -std::numeric_limits<double>::infinity();
        break;
    }
    result.overall_score = doc.at("overall_score").get<double>();
    result.tier = ParseTier(doc.at("tier").get<std::string>());
    for (const auto& c : doc.at("categories")) {
      result.categories.push_back(CategoryReportFromJson(c));
    }
    for (const auto& s : doc.at("skipped_categories")) {
      result.skipped_categories.push_back(
          {s.at("attribute").get<std::string>(), s.at("reason").get<std::string>()});
    }
    result.totals = CountsFromJson(doc.at("totals"));
    result.corpus_size = doc.at("corpus_size").get<size_t>();
    result.scored_utterances = doc.at("scored_utterances").get<size_t>();
    result.coverage = doc.at("coverage").get<double>();
    result.missing_hypotheses =
        doc.at("missing_hypotheses").get<std::vector<std::string>>();
    result.unmatched_transcripts = doc.at("unmatched_transcripts").get<size_t>();
    if (doc.contains("per_utterance")) {
      std::vector<AuditedUtterance> rows;
      for (const auto& u : doc.at("per_utterance")) {
        rows.push_back(UtteranceFromJson(u));
      }
      result.per_utterance = std::move(rows);
    }
    result.created_at = doc.at("created_at").get<std::string>();
    return result;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed audit document: ") + e.what());
  }
}

std::string SerializeAudit(const AuditResult& result) {
  return ToJson(result).dump(2) + "\n";
}

AuditResult ParseAudit(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("audit document is not JSON: ") + e.what());
  }
  return AuditResultFromJson(doc);
}

}  // namespace fairaudit
