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

// Data-parallel inner loops. Every kernel has a serial reference
// implementation and an OpenMP implementation with identical results: the
// parallel versions only map over independent elements and never reduce;
// outputs are bitwise equal for any thread count. Reductions are
// done by the callers in a fixed order.

#ifndef FAIRAUDIT_KERNELS_H_
#define FAIRAUDIT_KERNELS_H_

#include <span>
#include <vector>

#include "fairaudit/alignment.h"
#include "fairaudit/text.h"

namespace fairaudit::kernels {

enum class Execution { kSerial, kParallel };

// Below this many elements the parallel entry points run serially.
inline constexpr size_t kParallelThreshold = 512;

// counts[k] = Align(references[k], hypotheses[k]).
void AlignBatchSerial(std::span<const TokenSequence> references,
                      std::span<const TokenSequence> hypotheses,
                      std::span<AlignmentCounts> counts);
void AlignBatchParallel(std::span<const TokenSequence> references,
                        std::span<const TokenSequence> hypotheses,
                        std::span<AlignmentCounts> counts);

// Per-row Poisson terms for the linear predictor `eta`:
//   mean[i]   = exp(eta[i])
//   loglik[i] = y[i] * eta[i] - exp(eta[i]) - lgamma(y[i] + 1)
void PoissonRowsSerial(std::span<const double> y, std::span<const double> eta,
                       std::span<double> mean, std::span<double> loglik);
void PoissonRowsParallel(std::span<const double> y,
                         std::span<const double> eta, std::span<double> mean,
                         std::span<double> loglik);

// Conditional mode of each random intercept given the fixed part of the
// linear predictor. For group g with rows R_g, maximizes
//   sum_{i in R_g} [y_i (eta_i + u) - exp(eta_i + u)] - u^2 / (2 var)
// by safeguarded Newton iteration starting from modes[g]. Rows are given
// in CSR form: rows of group g are row_index[group_start[g] ..
// group_start[g + 1]).
struct GroupRows {
  std::span<const size_t> group_start;  // size = n_groups + 1
  std::span<const size_t> row_index;
};
void GroupModesSerial(std::span<const double> y,
                      std::span<const double> fixed_eta, GroupRows groups,
                      double variance, std::span<double> modes);
void GroupModesParallel(std::span<const double> y,
                        std::span<const double> fixed_eta, GroupRows groups,
                        double variance, std::span<double> modes);

// Dispatch helpers used by library code.
void AlignBatch(std::span<const TokenSequence> references,
                std::span<const TokenSequence> hypotheses,
                std::span<AlignmentCounts> counts,
                Execution execution = Execution::kParallel);
void PoissonRows(std::span<const double> y, std::span<const double> eta,
                 std::span<double> mean, std::span<double> loglik,
                 Execution execution = Execution::kParallel);
void GroupModes(std::span<const double> y, std::span<const double> fixed_eta,
                GroupRows groups, double variance, std::span<double> modes,
                Execution execution = Execution::kParallel);

}  // namespace fairaudit::kernels

#endif  // FAIRAUDIT_KERNELS_H_
