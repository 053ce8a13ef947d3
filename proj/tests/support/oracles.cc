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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace fairaudit::testing {

int64_t BruteForceEditDistance(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  std::map<std::pair<size_t, size_t>, int64_t> memo;
  std::function<int64_t(size_t, size_t)> dist = [&](size_t i, size_t j) -> int64_t {
    if (i == a.size()) return static_cast<int64_t>(b.size() - j);
    if (j == b.size()) return static_cast<int64_t>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int64_t best = dist(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, dist(i + 1, j) + 1);
    best = std::min(best, dist(i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return dist(0, 0);
}

namespace {

double PoissonLogLik(const std::vector<double>& y, const Eigen::VectorXd& eta) {
  double total = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    total += y[i] * eta[i] - std::exp(eta[i]) - std::lgamma(y[i] + 1.0);
  }
  return total;
}

}  // namespace

GlmOracleFit PoissonGlmIrls(const Eigen::MatrixXd& x, const std::vector<double>& y,
                            const std::vector<double>& offset) {
  const Eigen::Index n = x.rows();
  const Eigen::Map<const Eigen::VectorXd> off(offset.data(), n);
  GlmOracleFit fit;
  fit.beta = Eigen::VectorXd::Zero(x.cols());
  // Start from the saturated-ish log rate.
  Eigen::VectorXd eta(n);
  for (Eigen::Index i = 0; i < n; ++i) eta[i] = std::log(y[i] + 0.5);
  double previous = -INFINITY;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd mu = eta.array().exp();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = eta[i] - off[i] + (y[i] - mu[i]) / mu[i];
    Eigen::VectorXd sqrt_w = mu.array().sqrt();
    Eigen::MatrixXd xw = sqrt_w.asDiagonal() * x;
    Eigen::VectorXd zw = sqrt_w.cwiseProduct(z);
    fit.beta = xw.colPivHouseholderQr().solve(zw);
    eta = x * fit.beta + off;
    const double ll = PoissonLogLik(y, eta);
    if (std::abs(ll - previous) < 1e-12 * (1.0 + std::abs(ll))) {
      fit.converged = true;
      fit.loglik = ll;
      break;
    }
    previous = ll;
    fit.loglik = ll;
  }
  return fit;
}

double AdaptiveGaussHermiteLogLik(const Eigen::MatrixXd& x, const std::vector<double>& y,
                                  const std::vector<double>& offset,
                                  const std::vector<size_t>& group_of_row,
                                  const Eigen::VectorXd& beta, double sigma, int nodes) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd eta = x * beta;
  for (Eigen::Index i = 0; i < n; ++i) eta[i] += offset[i];
  if (sigma == 0.0) return PoissonLogLik(y, eta);

  // Golub-Welsch for the physicists' Hermite weight exp(-z^2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const Eigen::VectorXd z = eig.eigenvalues();
  Eigen::VectorXd w(nodes);
  for (int k = 0; k < nodes; ++k) {
    w[k] = std::sqrt(std::numbers::pi) * eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k);
  }

  const size_t groups = *std::max_element(group_of_row.begin(), group_of_row.end()) + 1;
  std::vector<std::vector<Eigen::Index>> rows(groups);
  for (Eigen::Index i = 0; i < n; ++i) rows[group_of_row[i]].push_back(i);

  const double s2 = sigma * sigma;
  double total = 0.0;
  for (const auto& r : rows) {
    auto h = [&](double u) {
      double value = -u * u / (2 * s2) - 0.5 * std::log(2 * std::numbers::pi * s2);
      for (Eigen::Index i : r) {
        value += y[i] * (eta[i] + u) - std::exp(eta[i] + u) - std::lgamma(y[i] + 1.0);
      }
      return value;
    };
    double u = 0.0;
    double curvature = 1.0 / s2;
    for (int iter = 0; iter < 200; ++iter) {
      double grad = -u / s2;
      curvature = 1.0 / s2;
      for (Eigen::Index i : r) {
        const double mu = std::exp(eta[i] + u);
        grad += y[i] - mu;
        curvature += mu;
      }
      const double step = grad / curvature;
      u += step;
      if (std::abs(step) < 1e-13) break;
    }
    curvature = 1.0 / s2;
    for (Eigen::Index i : r) curvature += std::exp(eta[i] + u);
    const double scale = std::sqrt(2.0 / curvature);
    const double h_mode = h(u);
    double sum = 0.0;
    for (int k = 0; k < nodes; ++k) {
      sum += w[k] * std::exp(h(u + scale * z[k]) - h_mode + z[k] * z[k]);
    }
    total += h_mode + std::log(scale * sum);
  }
  return total;
}

double KsDistanceToUniform(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double x = std::clamp(sample[i], 0.0, 1.0);
    d = std::max(d, std::max((i + 1) / n - x, x - i / n));
  }
  return d;
}

double EntropyBits(const std::vector<std::string>& labels) {
  std::map<std::string, double> counts;
  for (const auto& l : labels) counts[l] += 1.0;
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = c / static_cast<double>(labels.size());
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<double> QuartilesByHand(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double h = q * (values.size() - 1);
    const size_t lo = static_cast<size_t>(h);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - lo) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

}  // namespace fairaudit::testing
