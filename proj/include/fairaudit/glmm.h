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

// Poisson regression of per-utterance error counts with a per-speaker
// random intercept:
//
//   errors_i ~ Poisson(mu_i)
//   log mu_i = log N_i + beta0 + beta_level(i) + beta_logref * c_i + u_s(i)
//   u_s      ~ Normal(0, sigma_u^2)
//
// where N_i is the reference length (the offset) and c_i is log N_i centered
// over the corpus. The marginal likelihood over u is Laplace-approximated.
// For fixed sigma_u, fixed effects and speaker modes are found jointly by
// penalized IRLS (Newton on the penalized log-likelihood, Schur complement
// over the diagonal random-effect block); sigma_u is then chosen by
// golden-section search on the Laplace log-likelihood.

#ifndef FAIRAUDIT_GLMM_H_
#define FAIRAUDIT_GLMM_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fairaudit/alignment.h"
#include "fairaudit/corpus.h"
#include "fairaudit/kernels.h"

namespace fairaudit {

inline constexpr std::string_view kMergedLevel = "other_merged";
inline constexpr std::string_view kLogRefLen = "log_ref_len";
inline constexpr std::string_view kInterceptName = "(intercept)";

// One scored utterance joined with its speaker and demographics.
struct AuditedUtterance {
  std::string utterance_id;
  std::string speaker_id;
  DemographicProfile profile;
  AlignmentCounts counts;

  double wer() const { return Wer(counts); }
};

struct DesignSpec {
  Attribute attribute = Attribute::kGender;
  // Defaults to the most frequent level (ties: lexicographically first).
  std::optional<std::string> reference_level;
  // Only "log_ref_len" is recognized; it must appear exactly once.
  std::vector<std::string> covariates{std::string(kLogRefLen)};
  // Levels with fewer utterances are pooled into "other_merged".
  size_t min_level_size = 10;
  // Adds 0.5 errors, spread evenly over its rows, to every level whose
  // observed error total is zero. When false such levels raise Separation.
  bool continuity_correction = true;
};

struct Design {
  std::vector<double> response;  // error counts (non-integer only after
                                 // continuity correction)
  std::vector<double> offset;    // log N_i
  Eigen::MatrixXd x;             // fixed-effect columns, column 0 = intercept
  std::vector<std::string> column_names;

  // Attribute bookkeeping. levels[0] is the reference level.
  std::string attribute;
  std::vector<std::string> levels;
  std::vector<size_t> level_counts;
  std::vector<int> level_of_row;
  std::vector<int> level_column;  // -1 for the reference or when dropped
  bool has_attribute = false;
  int logref_column = -1;

  // Speakers in first-seen order, plus CSR row lists per speaker.
  std::vector<std::string> group_ids;
  std::vector<size_t> group_of_row;
  std::vector<size_t> group_start;
  std::vector<size_t> group_rows;

  double xbar = 0.0;               // mean of log N_i
  double continuity_added = 0.0;   // total pseudo-errors added

  size_t n_rows() const { return response.size(); }
  size_t n_groups() const { return group_ids.size(); }
  Eigen::Index n_fixed() const { return x.cols(); }
  int attribute_df() const { return static_cast<int>(levels.size()) - 1; }

  // Assembles a design from raw columns, e.g. for intercept-only models.
  // Groups are taken from `group_of_row` (ids "g0", "g1", ...).
  static Design FromColumns(std::vector<double> response,
                            std::vector<double> offset, Eigen::MatrixXd x,
                            std::vector<std::string> column_names,
                            std::vector<size_t> group_of_row);
};

// Throws kSingleLevelAttribute (< 2 levels after merging), kSeparation,
// kInvalidArgument (N = 0 rows, bad covariate list, unobserved reference).
Design BuildDesign(std::span<const AuditedUtterance> utterances,
                   const DesignSpec& setup);

// The nested model without the attribute dummies.
Design DropAttribute(const Design& full);

struct FitOptions {
  double inner_tolerance = 1e-8;  // gradient 2-norm of the penalized objective
  int inner_max_iterations = 100;
  double sigma_lower = 0.0;
  double sigma_upper = 5.0;
  double sigma_tolerance = 1e-4;  // final golden-section bracket width
  bool pin_sigma_zero = false;
  kernels::Execution execution = kernels::Execution::kParallel;
};

struct FittedModel {
  double beta0 = 0.0;
  std::map<std::string, double> beta_g;  // reference level maps to 0
  std::string reference_level;
  double beta_logref = 0.0;
  double sigma_u = 0.0;
  double loglik = 0.0;  // Laplace-approximate marginal log-likelihood
  bool converged = false;
  int n_iter = 0;         // golden-section iterations
  int inner_iterations = 0;  // PIRLS iterations at the selected sigma_u
  double gradient_norm = 0.0;

  std::vector<std::string> column_names;
  Eigen::VectorXd coefficients;
  std::vector<double> modes;  // conditional speaker modes
};

// Throws kNonFinite if the objective diverges and kInvalidArgument for a
// single-group design without pin_sigma_zero.
FittedModel FitPoissonGlmm(const Design& design, const FitOptions& options = {});

// Fits with sigma_u held at `sigma` (0 gives a plain Poisson GLM).
FittedModel FitPoissonGlmmAtSigma(const Design& design, double sigma,
                                  const FitOptions& options = {});

// Recomputes the Laplace log-likelihood of `model` on `design` from its
// coefficients and sigma_u. Throws kDimensionMismatch when the design's
// columns differ from the model's.
double LogLikelihood(const FittedModel& model, const Design& design,
                     kernels::Execution execution = kernels::Execution::kParallel);

struct LrtResult {
  double stat = 0.0;      // clamped at 0
  double raw_stat = 0.0;  // 2 (loglik_full - loglik_reduced), unclamped
  int df = 1;
  double p_value = 1.0;
};

// Throws kNotNested when df <= 0.
LrtResult Lrt(const FittedModel& full, const FittedModel& reduced, int df);
LrtResult LrtFromLogLik(double loglik_full, double loglik_reduced, int df);

// exp(beta0 + beta_g + beta_logref * xbar) / (exp(xbar) - 1).
// Throws kUnknownLevel and kDegenerateXbar (xbar <= 0).
double PredictGroupWer(const FittedModel& model, const std::string& level,
                       double xbar);

}  // namespace fairaudit

#endif  // FAIRAUDIT_GLMM_H_
