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

#include "fairaudit/glmm.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fairaudit/chi_square.h"
#include "fairaudit/error.h"

namespace fairaudit {
namespace {

// Fills the CSR row lists from group_of_row.
void IndexGroups(Design& design) {
  const size_t n_groups = design.group_ids.size();
  design.group_start.assign(n_groups + 1, 0);
  for (size_t g : design.group_of_row) ++design.group_start[g + 1];
  std::partial_sum(design.group_start.begin(), design.group_start.end(),
                   design.group_start.begin());
  design.group_rows.resize(design.group_of_row.size());
  std::vector<size_t> fill(design.group_start.begin(),
                           design.group_start.end() - 1);
  for (size_t i = 0; i < design.group_of_row.size(); ++i) {
    design.group_rows[fill[design.group_of_row[i]]++] = i;
  }
}

kernels::GroupRows RowsOf(const Design& design) {
  return {design.group_start, design.group_rows};
}

struct State {
  Eigen::VectorXd beta;
  std::vector<double> u;
};

struct InnerResult {
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double loglik = 0.0;  // Laplace log-likelihood at the final state
};

// Newton iteration on the penalized log-likelihood
//   h(beta, u) = sum_i [y_i eta_i - exp(eta_i) - log y_i!] - sum_g u_g^2 / (2 s^2)
// for a fixed random-intercept standard deviation s (s = 0 drops u).
class PenalizedIrls {
 public:
  PenalizedIrls(const Design& design, const FitOptions& options)
      : design_(design),
        options_(options),
        eta_(design.n_rows()),
        mean_(design.n_rows()),
        loglik_(design.n_rows()) {}

  InnerResult Run(State& state, double sigma) {
    const bool random = sigma > 0.0;
    const double precision = random ? 1.0 / (sigma * sigma) : 0.0;
    const Eigen::Index p = design_.n_fixed();
    const size_t n_groups = random ? design_.n_groups() : 0;
    if (!random) std::fill(state.u.begin(), state.u.end(), 0.0);

    double objective = Evaluate(state, sigma);
    if (!std::isfinite(objective)) {
      throw Error(ErrorCode::kNonFinite,
                  "penalized log-likelihood is not finite at the start point");
    }

    InnerResult result;
    Eigen::VectorXd residual(design_.n_rows());
    Eigen::VectorXd grad_u(n_groups), group_mean(n_groups);
    Eigen::MatrixXd cross(p, n_groups);
    for (int iter = 0;; ++iter) {
      for (size_t i = 0; i < design_.n_rows(); ++i) {
        residual[i] = design_.response[i] - mean_[i];
      }
      const Eigen::VectorXd grad_beta = design_.x.transpose() * residual;
      double norm2 = grad_beta.squaredNorm();
      if (random) {
        grad_u.setZero();
        group_mean.setZero();
        cross.setZero();
        for (size_t i = 0; i < design_.n_rows(); ++i) {
          const size_t g = design_.group_of_row[i];
          grad_u[g] += residual[i];
          group_mean[g] += mean_[i];
          cross.col(g) += mean_[i] * design_.x.row(i).transpose();
        }
        for (size_t g = 0; g < n_groups; ++g) {
          grad_u[g] -= state.u[g] * precision;
        }
        norm2 += grad_u.squaredNorm();
      }
      result.gradient_norm = std::sqrt(norm2);
      result.iterations = iter;
      if (result.gradient_norm <= options_.inner_tolerance) {
        result.converged = true;
        break;
      }
      if (iter >= options_.inner_max_iterations) break;

      // Newton system [A B; B' D] [db; du] = [grad_beta; grad_u] with
      // A = X'WX, B = X'WZ, D = diag(Z'WZ) + precision. Eliminate du.
      Eigen::MatrixXd info =
          design_.x.transpose() *
          (Eigen::Map<const Eigen::VectorXd>(mean_.data(), mean_.size())
               .asDiagonal() *
           design_.x);
      Eigen::VectorXd rhs = grad_beta;
      Eigen::VectorXd diag_inv;
      if (random) {
        diag_inv = (group_mean.array() + precision).inverse().matrix();
        info.noalias() -= cross * diag_inv.asDiagonal() * cross.transpose();
        rhs.noalias() -= cross * diag_inv.cwiseProduct(grad_u);
      }
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw Error(ErrorCode::kNonFinite,
                    "fixed-effect information matrix is singular");
      }
      const Eigen::VectorXd step_beta = ldlt.solve(rhs);
      Eigen::VectorXd step_u;
      if (random) {
        step_u = diag_inv.cwiseProduct(grad_u - cross.transpose() * step_beta);
      }
      if (!step_beta.allFinite() || (random && !step_u.allFinite())) {
        throw Error(ErrorCode::kNonFinite, "Newton step is not finite");
      }

      // Step halving; tolerate rounding-level decreases near the optimum.
      const double slack = 1e-12 * (1.0 + std::abs(objective));
      State trial = state;
      double scale = 1.0;
      bool accepted = false;
      for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
        trial.beta = state.beta + scale * step_beta;
        for (size_t g = 0; g < n_groups; ++g) {
          trial.u[g] = state.u[g] + scale * step_u[g];
        }
        const double value = Evaluate(trial, sigma);
        if (std::isfinite(value) && value >= objective - slack) {
          objective = value;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        Evaluate(state, sigma);  // restore row terms of the current state
        break;
      }
      state = std::move(trial);
    }

    result.loglik = RowLogLikSum();
    if (random) {
      for (size_t g = 0; g < n_groups; ++g) {
        double m = 0.0;
        for (size_t k = design_.group_start[g]; k < design_.group_start[g + 1];
             ++k) {
          m += mean_[design_.group_rows[k]];
        }
        result.loglik -= 0.5 * state.u[g] * state.u[g] * precision +
                         0.5 * std::log1p(sigma * sigma * m);
      }
    }
    return result;
  }

 private:
  // Fills eta_, mean_, loglik_ for `state` and returns the penalized
  // objective.
  double Evaluate(const State& state, double sigma) {
    const Eigen::VectorXd fixed = design_.x * state.beta;
    const bool random = sigma > 0.0;
    for (size_t i = 0; i < design_.n_rows(); ++i) {
      eta_[i] = design_.offset[i] + fixed[i] +
                (random ? state.u[design_.group_of_row[i]] : 0.0);
    }
    kernels::PoissonRows(design_.response, eta_, mean_, loglik_,
                         options_.execution);
    double value = RowLogLikSum();
    if (random) {
      const double precision = 1.0 / (sigma * sigma);
      for (double u : state.u) value -= 0.5 * u * u * precision;
    }
    return value;
  }

  double RowLogLikSum() const {
    double sum = 0.0;
    for (double term : loglik_) sum += term;
    return sum;
  }

  const Design& design_;
  const FitOptions& options_;
  std::vector<double> eta_;
  std::vector<double> mean_;
  std::vector<double> loglik_;
};

State InitialState(const Design& design) {
  State state;
  state.beta = Eigen::VectorXd::Zero(design.n_fixed());
  state.u.assign(design.n_groups(), 0.0);
  double total = 0.0;
  double exposure = 0.0;
  for (size_t i = 0; i < design.n_rows(); ++i) {
    total += design.response[i];
    exposure += std::exp(design.offset[i]);
  }
  if (design.n_fixed() > 0 && exposure > 0.0) {
    state.beta[0] = std::log(std::max(total, 0.5) / exposure);
  }
  return state;
}

FittedModel MakeModel(const Design& design, const State& state, double sigma,
                      const InnerResult& inner) {
  FittedModel model;
  model.coefficients = state.beta;
  model.column_names = design.column_names;
  model.beta0 = design.n_fixed() > 0 ? state.beta[0] : 0.0;
  if (design.logref_column >= 0) {
    model.beta_logref = state.beta[design.logref_column];
  }
  if (design.has_attribute) {
    model.reference_level = design.levels.front();
    for (size_t k = 0; k < design.levels.size(); ++k) {
      const int column = design.level_column[k];
      model.beta_g[design.levels[k]] = column >= 0 ? state.beta[column] : 0.0;
    }
  }
  model.sigma_u = sigma;
  model.loglik = inner.loglik;
  model.converged = inner.converged;
  model.inner_iterations = inner.iterations;
  model.gradient_norm = inner.gradient_norm;
  if (sigma > 0.0) {
    model.modes = state.u;
  } else {
    model.modes.assign(design.n_groups(), 0.0);
  }
  return model;
}

void CheckDesign(const Design& design) {
  const size_t n = design.n_rows();
  if (design.offset.size() != n || static_cast<size_t>(design.x.rows()) != n ||
      design.group_of_row.size() != n ||
      design.column_names.size() != static_cast<size_t>(design.x.cols())) {
    throw Error(ErrorCode::kDimensionMismatch, "design columns disagree");
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "design has no rows");
  for (double y : design.response) {
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "responses must be finite and nonnegative");
    }
  }
}

}  // namespace

Design Design::FromColumns(std::vector<double> response,
                           std::vector<double> offset, Eigen::MatrixXd x,
                           std::vector<std::string> column_names,
                           std::vector<size_t> group_of_row) {
  Design design;
  design.response = std::move(response);
  design.offset = std::move(offset);
  design.x = std::move(x);
  design.column_names = std::move(column_names);
  design.group_of_row = std::move(group_of_row);
  size_t n_groups = 0;
  for (size_t g : design.group_of_row) n_groups = std::max(n_groups, g + 1);
  for (size_t g = 0; g < n_groups; ++g) {
    design.group_ids.push_back("g" + std::to_string(g));
  }
  double sum = 0.0;
  for (double o : design.offset) sum += o;
  design.xbar = design.offset.empty() ? 0.0 : sum / design.offset.size();
  IndexGroups(design);
  CheckDesign(design);
  return design;
}

Design BuildDesign(std::span<const AuditedUtterance> utterances,
                   const DesignSpec& setup) {
  if (utterances.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no utterances to model");
  }
  int logref_mentions = 0;
  for (const auto& name : setup.covariates) {
    if (name != kLogRefLen) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unsupported covariate '" + name + "'");
    }
    ++logref_mentions;
  }
  if (logref_mentions > 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariate log_ref_len listed more than once");
  }

  const std::string attribute(AttributeName(setup.attribute));
  const size_t n = utterances.size();

  // Level merging.
  std::unordered_map<std::string, size_t> raw_counts;
  for (const auto& utt : utterances) {
    if (utt.counts.reference_length < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "utterance '" + utt.utterance_id + "' has N = 0");
    }
    ++raw_counts[std::string(utt.profile.Get(setup.attribute))];
  }
  std::vector<std::string> row_level(n);
  std::map<std::string, size_t> level_counts;
  for (size_t i = 0; i < n; ++i) {
    std::string label(utterances[i].profile.Get(setup.attribute));
    if (raw_counts[label] < setup.min_level_size) label = kMergedLevel;
    ++level_counts[label];
    row_level[i] = std::move(label);
  }
  if (level_counts.size() < 2) {
    throw Error(ErrorCode::kSingleLevelAttribute,
                "attribute '" + attribute + "' has fewer than 2 levels" +
                    (setup.min_level_size > 1 ? " after merging" : ""));
  }

  std::string reference;
  if (setup.reference_level) {
    if (!level_counts.contains(*setup.reference_level)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "reference level '" + *setup.reference_level +
                      "' is not observed for '" + attribute + "'");
    }
    reference = *setup.reference_level;
  } else {
    size_t best = 0;
    for (const auto& [label, count] : level_counts) {  // lexical order
      if (count > best) {
        best = count;
        reference = label;
      }
    }
  }

  Design design;
  design.attribute = attribute;
  design.has_attribute = true;
  design.levels.push_back(reference);
  for (const auto& [label, count] : level_counts) {
    if (label != reference) design.levels.push_back(label);
  }
  std::unordered_map<std::string, int> level_index;
  for (size_t k = 0; k < design.levels.size(); ++k) {
    level_index[design.levels[k]] = static_cast<int>(k);
    design.level_counts.push_back(level_counts[design.levels[k]]);
  }

  design.response.resize(n);
  design.offset.resize(n);
  design.level_of_row.resize(n);
  std::vector<double> level_errors(design.levels.size(), 0.0);
  double log_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    design.response[i] = static_cast<double>(utterances[i].counts.errors());
    design.offset[i] =
        std::log(static_cast<double>(utterances[i].counts.reference_length));
    design.level_of_row[i] = level_index[row_level[i]];
    level_errors[design.level_of_row[i]] += design.response[i];
    log_sum += design.offset[i];
  }
  design.xbar = log_sum / static_cast<double>(n);

  for (size_t k = 0; k < design.levels.size(); ++k) {
    if (level_errors[k] > 0.0) continue;
    if (!setup.continuity_correction) {
      throw Error(ErrorCode::kSeparation,
                  "level '" + design.levels[k] + "' of '" + attribute +
                      "' has zero errors");
    }
    const double share = 0.5 / static_cast<double>(design.level_counts[k]);
    for (size_t i = 0; i < n; ++i) {
      if (design.level_of_row[i] == static_cast<int>(k)) {
        design.response[i] += share;
      }
    }
    design.continuity_added += 0.5;
  }

  // Columns: intercept, level dummies, centered log N (dropped when
  // constant, where it would duplicate the intercept).
  double log_var = 0.0;
  for (double o : design.offset) log_var += (o - design.xbar) * (o - design.xbar);
  const bool with_logref = logref_mentions == 1 && log_var > 1e-12;
  const Eigen::Index p = static_cast<Eigen::Index>(design.levels.size()) +
                         (with_logref ? 1 : 0);
  design.x = Eigen::MatrixXd::Zero(n, p);
  design.column_names.push_back(std::string(kInterceptName));
  design.level_column.assign(design.levels.size(), -1);
  for (size_t k = 1; k < design.levels.size(); ++k) {
    design.level_column[k] = static_cast<int>(k);
    design.column_names.push_back(attribute + "=" + design.levels[k]);
  }
  if (with_logref) {
    design.logref_column = static_cast<int>(p - 1);
    design.column_names.push_back(std::string(kLogRefLen));
  }
  for (size_t i = 0; i < n; ++i) {
    design.x(i, 0) = 1.0;
    const int column = design.level_column[design.level_of_row[i]];
    if (column >= 0) design.x(i, column) = 1.0;
    if (with_logref) design.x(i, p - 1) = design.offset[i] - design.xbar;
  }

  std::unordered_map<std::string, size_t> group_index;
  design.group_of_row.resize(n);
  for (size_t i = 0; i < n; ++i) {
    auto [it, inserted] =
        group_index.try_emplace(utterances[i].speaker_id, design.group_ids.size());
    if (inserted) design.group_ids.push_back(utterances[i].speaker_id);
    design.group_of_row[i] = it->second;
  }
  IndexGroups(design);
  return design;
}

Design DropAttribute(const Design& full) {
  Design reduced = full;
  reduced.has_attribute = false;
  std::vector<Eigen::Index> keep;
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < full.x.cols(); ++c) {
    if (std::find(full.level_column.begin(), full.level_column.end(), c) !=
        full.level_column.end()) {
      continue;
    }
    keep.push_back(c);
    names.push_back(full.column_names[c]);
  }
  reduced.x = Eigen::MatrixXd(full.x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    reduced.x.col(static_cast<Eigen::Index>(k)) = full.x.col(keep[k]);
    if (keep[k] == full.logref_column) {
      reduced.logref_column = static_cast<int>(k);
    }
  }
  reduced.column_names = std::move(names);
  std::fill(reduced.level_column.begin(), reduced.level_column.end(), -1);
  return reduced;
}

FittedModel FitPoissonGlmmAtSigma(const Design& design, double sigma,
                                  const FitOptions& options) {
  CheckDesign(design);
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma_u must be >= 0");
  }
  PenalizedIrls irls(design, options);
  State state = InitialState(design);
  const InnerResult inner = irls.Run(state, sigma);
  FittedModel model = MakeModel(design, state, sigma, inner);
  model.n_iter = 0;
  return model;
}

FittedModel FitPoissonGlmm(const Design& design, const FitOptions& options) {
  CheckDesign(design);
  if (options.pin_sigma_zero) return FitPoissonGlmmAtSigma(design, 0.0, options);
  if (design.n_groups() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "random intercept needs at least 2 groups; pin sigma_u to 0");
  }
  if (!(options.sigma_lower >= 0.0 && options.sigma_upper > options.sigma_lower)) {
    throw Error(ErrorCode::kInvalidArgument, "bad sigma_u search interval");
  }

  PenalizedIrls irls(design, options);
  State current = InitialState(design);

  struct Candidate {
    double sigma = 0.0;
    State state;
    InnerResult inner;
  };
  Candidate best;
  bool have_best = false;
  auto evaluate = [&](double sigma) {
    const InnerResult inner = irls.Run(current, sigma);
    if (!have_best || inner.loglik > best.inner.loglik) {
      best = Candidate{sigma, current, inner};
      have_best = true;
    }
    return inner.loglik;
  };

  // Plain GLM at sigma_u = 0 first; it also warm-starts the search.
  evaluate(0.0);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = options.sigma_lower;
  double hi = options.sigma_upper;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = evaluate(c);
  double fd = evaluate(d);
  int iterations = 0;
  while (hi - lo > options.sigma_tolerance) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = evaluate(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = evaluate(d);
    }
    ++iterations;
  }

  FittedModel model = MakeModel(design, best.state, best.sigma, best.inner);
  model.n_iter = iterations;
  return model;
}

double LogLikelihood(const FittedModel& model, const Design& design,
                     kernels::Execution execution) {
  if (model.coefficients.size() != design.n_fixed() ||
      model.column_names != design.column_names) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model coefficients do not match the design columns");
  }
  CheckDesign(design);
  const size_t n = design.n_rows();
  const Eigen::VectorXd fixed = design.x * model.coefficients;
  std::vector<double> fixed_eta(n);
  for (size_t i = 0; i < n; ++i) fixed_eta[i] = design.offset[i] + fixed[i];

  const double sigma = model.sigma_u;
  std::vector<double> modes(design.n_groups(), 0.0);
  if (sigma > 0.0) {
    if (model.modes.size() == modes.size()) modes = model.modes;
    kernels::GroupModes(design.response, fixed_eta, RowsOf(design),
                        sigma * sigma, modes, execution);
  }

  std::vector<double> eta(n), mean(n), terms(n);
  for (size_t i = 0; i < n; ++i) {
    eta[i] = fixed_eta[i] + modes[design.group_of_row[i]];
  }
  kernels::PoissonRows(design.response, eta, mean, terms, execution);
  double loglik = 0.0;
  for (double t : terms) loglik += t;
  if (sigma > 0.0) {
    const double precision = 1.0 / (sigma * sigma);
    for (size_t g = 0; g < design.n_groups(); ++g) {
      double m = 0.0;
      for (size_t k = design.group_start[g]; k < design.group_start[g + 1]; ++k) {
        m += mean[design.group_rows[k]];
      }
      loglik -= 0.5 * modes[g] * modes[g] * precision +
                0.5 * std::log1p(sigma * sigma * m);
    }
  }
  return loglik;
}

LrtResult LrtFromLogLik(double loglik_full, double loglik_reduced, int df) {
  if (df <= 0) {
    throw Error(ErrorCode::kNotNested,
                "likelihood-ratio test needs df > 0, got " + std::to_string(df));
  }
  if (!std::isfinite(loglik_full) || !std::isfinite(loglik_reduced)) {
    throw Error(ErrorCode::kNonFinite, "log-likelihood is not finite");
  }
  LrtResult result;
  result.df = df;
  result.raw_stat = 2.0 * (loglik_full - loglik_reduced);
  result.stat = std::max(0.0, result.raw_stat);
  result.p_value = ChiSquareSurvival(result.stat, df);
  return result;
}

LrtResult Lrt(const FittedModel& full, const FittedModel& reduced, int df) {
  return LrtFromLogLik(full.loglik, reduced.loglik, df);
}

double PredictGroupWer(const FittedModel& model, const std::string& level,
                       double xbar) {
  auto it = model.beta_g.find(level);
  if (it == model.beta_g.end()) {
    throw Error(ErrorCode::kUnknownLevel, "level '" + level + "' not in model");
  }
  if (!(xbar > 0.0)) {
    throw Error(ErrorCode::kDegenerateXbar,
                "mean log reference length must be positive");
  }
  return std::exp(model.beta0 + it->second + model.beta_logref * xbar) /
         std::expm1(xbar);
}

}  // namespace fairaudit
