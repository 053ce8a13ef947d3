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

#include "fairaudit/chi_square.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairaudit/error.h"

namespace fairaudit {
namespace {

constexpr int kMaxIterations = 1000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// log of the common prefactor x^a e^{-x} / Gamma(a).
double LogPrefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

// P(a, x) by the series  e^{-x} x^a / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n)).
double LowerSeries(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double denominator = a;
  for (int n = 1; n < kMaxIterations; ++n) {
    denominator += 1.0;
    term *= x / denominator;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEpsilon) break;
  }
  return sum * std::exp(LogPrefactor(a, x));
}

// Q(a, x) by the modified Lentz evaluation of
//   1 / (x + 1 - a - 1 (1 - a) / (x + 3 - a - 2 (2 - a) / (x + 5 - a - ...))).
double UpperContinuedFraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(LogPrefactor(a, x)) * h;
}

void CheckArguments(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || std::isnan(x)) {
    throw Error(ErrorCode::kInvalidArgument,
                "incomplete gamma needs a > 0 and x >= 0");
  }
}

}  // namespace

double RegularizedGammaP(double a, double x) {
  CheckArguments(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return LowerSeries(a, x);
  return 1.0 - UpperContinuedFraction(a, x);
}

double RegularizedGammaQ(double a, double x) {
  CheckArguments(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - LowerSeries(a, x);
  return UpperContinuedFraction(a, x);
}

double ChiSquareSurvival(double stat, int df) {
  if (df <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "chi-square df must be positive");
  }
  if (std::isnan(stat)) {
    throw Error(ErrorCode::kNonFinite, "chi-square statistic is NaN");
  }
  if (stat <= 0.0) return 1.0;
  const double q = RegularizedGammaQ(0.5 * df, 0.5 * stat);
  return std::min(1.0, std::max(0.0, q));
}

}  // namespace fairaudit
