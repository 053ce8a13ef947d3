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

#ifndef FAIRAUDIT_CHI_SQUARE_H_
#define FAIRAUDIT_CHI_SQUARE_H_

namespace fairaudit {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0. Power series
// for x < a + 1, Lentz continued fraction for Q otherwise.
double RegularizedGammaP(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
// directly in the tail with full relative precision for small values.
double RegularizedGammaQ(double a, double x);

// Upper tail Pr[X >= stat] of a chi-square variable with `df` degrees of
// freedom. Returns 1 for stat <= 0.
double ChiSquareSurvival(double stat, int df);

}  // namespace fairaudit

#endif  // FAIRAUDIT_CHI_SQUARE_H_
