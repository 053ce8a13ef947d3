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

// JSON documents for audits and fitted models. The audit document is the
// store format, the API payload, and the CLI `--out` file. Object keys are
// emitted in sorted order and serialization is byte-stable.
//
// Audit keys: model_id, wer, faas (null for the sentinels), faas_status,
// overall_score, tier, categories[], skipped_categories[], totals,
// corpus_size, scored_utterances, coverage, missing_hypotheses[],
// unmatched_transcripts, per_utterance[] (optional), created_at.
//
// Model keys: beta0, beta, beta_logref, sigma_u, loglik, converged, n_iter,
// plus reference_level, inner_iterations, gradient_norm, columns,
// coefficients.

#ifndef FAIRAUDIT_AUDIT_JSON_H_
#define FAIRAUDIT_AUDIT_JSON_H_

#include <string>
#include <string_view>

#include "json.hpp"

#include "fairaudit/fairness.h"
#include "fairaudit/glmm.h"

namespace fairaudit {

nlohmann::json ToJson(const FittedModel& model);
FittedModel FittedModelFromJson(const nlohmann::json& doc);

nlohmann::json ToJson(const CategoryReport& report);
CategoryReport CategoryReportFromJson(const nlohmann::json& doc);

nlohmann::json ToJson(const AuditResult& result);
// Throws Error(kInvalidArgument) on a structurally invalid document.
AuditResult AuditResultFromJson(const nlohmann::json& doc);

// Pretty-printed document with a trailing newline.
std::string SerializeAudit(const AuditResult& result);
AuditResult ParseAudit(std::string_view text);

}  // namespace fairaudit

#endif  // FAIRAUDIT_AUDIT_JSON_H_
