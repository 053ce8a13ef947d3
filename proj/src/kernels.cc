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

#include "fairaudit/kernels.h"

#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>

#include "fairaudit/error.h"

namespace fairaudit::kernels {
namespace {

void CheckSizes(size_t a, size_t b, size_t c, const char* what) {
  if (a != b || a != c) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": span sizes differ");
  }
}

inline void PoissonRow(double y, double eta, double& mean, double& loglik) {
  mean = std::exp(eta);
  loglik = y * eta - mean - std::lgamma(y + 1.0);
}

// Newton on a strictly concave scalar function; the step is halved until
// the objective does not decrease. Steps below 1e-6 are taken unchecked.
double GroupMode(std::span<const double> y, std::span<const double> fixed_eta,
                 std::span<const size_t> rows, double variance, double start) {
  auto objective = [&](double u) {
    double value = -0.5 * u * u / variance;
    for (size_t i : rows) {
      const double eta = fixed_eta[i] + u;
      value += y[i] * eta - std::exp(eta);
    }
    return value;
  };
  double u = start;
  double current = objective(u);
  for (int iter = 0; iter < 100; ++iter) {
    double gradient = -u / variance;
    double curvature = 1.0 / variance;
    for (size_t i : rows) {
      const double mean = std::exp(fixed_eta[i] + u);
      gradient += y[i] - mean;
      curvature += mean;
    }
    if (std::abs(gradient) <= 1e-12 * (1.0 + curvature)) break;
    double step = gradient / curvature;
    double next = u + step;
    double value = objective(next);
    int halvings = 0;
    const bool local = std::abs(step) < 1e-6;
    while (!local && !(value >= current) && halvings < 60) {
      step *= 0.5;
      next = u + step;
      value = objective(next);
      ++halvings;
    }
    if (next == u) break;
    u = next;
    current = value;
  }
  return u;
}

}  // namespace

void AlignBatchSerial(std::span<const TokenSequence> references,
                      std::span<const TokenSequence> hypotheses,
                      std::span<AlignmentCounts> counts) {
  CheckSizes(references.size(), hypotheses.size(), counts.size(), "AlignBatch");
  for (size_t k = 0; k < references.size(); ++k) {
    counts[k] = Align(references[k], hypotheses[k]);
  }
}

void AlignBatchParallel(std::span<const TokenSequence> references,
                        std::span<const TokenSequence> hypotheses,
                        std::span<AlignmentCounts> counts) {
  CheckSizes(references.size(), hypotheses.size(), counts.size(), "AlignBatch");
  const auto n = static_cast<int64_t>(references.size());
  // Exceptions must not escape an OpenMP region; keep the first one.
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 64)
  for (int64_t k = 0; k < n; ++k) {
    try {
      counts[k] = Align(references[k], hypotheses[k]);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void PoissonRowsSerial(std::span<const double> y, std::span<const double> eta,
                       std::span<double> mean, std::span<double> loglik) {
  CheckSizes(y.size(), eta.size(), mean.size(), "PoissonRows");
  CheckSizes(y.size(), loglik.size(), y.size(), "PoissonRows");
  for (size_t i = 0; i < y.size(); ++i) {
    PoissonRow(y[i], eta[i], mean[i], loglik[i]);
  }
}

void PoissonRowsParallel(std::span<const double> y,
                         std::span<const double> eta, std::span<double> mean,
                         std::span<double> loglik) {
  CheckSizes(y.size(), eta.size(), mean.size(), "PoissonRows");
  CheckSizes(y.size(), loglik.size(), y.size(), "PoissonRows");
  const auto n = static_cast<int64_t>(y.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    PoissonRow(y[i], eta[i], mean[i], loglik[i]);
  }
}

void GroupModesSerial(std::span<const double> y,
                      std::span<const double> fixed_eta, GroupRows groups,
                      double variance, std::span<double> modes) {
  const size_t n_groups = modes.size();
  for (size_t g = 0; g < n_groups; ++g) {
    const auto rows = groups.row_index.subspan(
        groups.group_start[g], groups.group_start[g + 1] - groups.group_start[g]);
    modes[g] = GroupMode(y, fixed_eta, rows, variance, modes[g]);
  }
}

void GroupModesParallel(std::span<const double> y,
                        std::span<const double> fixed_eta, GroupRows groups,
                        double variance, std::span<double> modes) {
  const auto n_groups = static_cast<int64_t>(modes.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t g = 0; g < n_groups; ++g) {
    const auto rows = groups.row_index.subspan(
        groups.group_start[g], groups.group_start[g + 1] - groups.group_start[g]);
    modes[g] = GroupMode(y, fixed_eta, rows, variance, modes[g]);
  }
}

void AlignBatch(std::span<const TokenSequence> references,
                std::span<const TokenSequence> hypotheses,
                std::span<AlignmentCounts> counts, Execution execution) {
  if (execution == Execution::kParallel &&
      references.size() >= kParallelThreshold) {
    AlignBatchParallel(references, hypotheses, counts);
  } else {
    AlignBatchSerial(references, hypotheses, counts);
  }
}

void PoissonRows(std::span<const double> y, std::span<const double> eta,
                 std::span<double> mean, std::span<double> loglik,
                 Execution execution) {
  if (execution == Execution::kParallel && y.size() >= kParallelThreshold) {
    PoissonRowsParallel(y, eta, mean, loglik);
  } else {
    PoissonRowsSerial(y, eta, mean, loglik);
  }
}

void GroupModes(std::span<const double> y, std::span<const double> fixed_eta,
                GroupRows groups, double variance, std::span<double> modes,
                Execution execution) {
  if (groups.group_start.size() != modes.size() + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "GroupModes: group_start must have n_groups + 1 entries");
  }
  if (execution == Execution::kParallel && y.size() >= kParallelThreshold) {
    GroupModesParallel(y, fixed_eta, groups, variance, modes);
  } else {
    GroupModesSerial(y, fixed_eta, groups, variance, modes);
  }
}

}  // namespace fairaudit::kernels
