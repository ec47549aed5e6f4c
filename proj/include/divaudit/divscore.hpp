//
// Copyright 2026 The divaudit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// DivScore: control-set proxy for the disparity of an unlabeled collection.
//
// With sim(S, T_i) the mean similarity between S and T_i, the raw gap
// d_hat = sim(S, T_0) - sim(S, T_1) is normalized per group by the control
// set's own cross-group mean l and within-group means u_i:
//
//   s_i = (sim(S, T_i) - l) / (u_i - l),     estimate = s_0 - s_1.
//
// The file also carries the concentration-bound calculators that say how
// far d_hat / (mu_same - mu_diff) may sit from d(S).

#ifndef DIVAUDIT_DIVSCORE_HPP_
#define DIVAUDIT_DIVSCORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divaudit/core.hpp"
#include "divaudit/errors.hpp"

namespace divaudit {

enum class Method { kDivScore, kIid, kSsSt, kTrue };

constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::kDivScore: return "divscore";
    case Method::kIid: return "iid";
    case Method::kSsSt: return "ss_st";
    case Method::kTrue: return "true";
  }
  return "unknown";
}

// Per-element sums of sim(x, T_i) over the collection, kept so that
// additions and removals can be applied without a full pass.
struct RunningSums {
  double sum_t0 = 0.0;
  double sum_t1 = 0.0;
  std::size_t count = 0;
};

struct DisparityReport {
  double estimate = 0.0;
  Method method = Method::kDivScore;
  std::optional<NormStats> norm_stats;
  double raw_dhat = 0.0;
  std::map<std::string, double> diagnostics;
  std::optional<RunningSums> running;
};

struct DivScoreOptions {
  double eps_norm = 1e-6;
  bool clip = false;
  bool with_bounds = false;
  double log_base = std::numbers::e;
};

// ---------------------------------------------------------------------------
// Bound calculators

struct BoundInputs {
  std::size_t n = 0;  // |S|
  std::size_t t = 0;  // |T|
  double mu_diff = 0.0;
  double gamma = 0.0;
  std::optional<double> delta;
  std::optional<double> mu_same;  // defaults to mu_diff + gamma
  double log_base = std::numbers::e;
};

struct ProbabilityBound {
  double raw = 0.0;
  double clamped = 0.0;
};

struct TheoremBound {
  double delta = 0.0;
  double raw_error = 0.0;       // half-width around (mu_same - mu_diff) * d(S)
  double additive_error = 0.0;  // half-width after dividing by mu_same - mu_diff
  double success_probability = 0.0;
};

namespace detail {

inline void validate_bound_inputs(const BoundInputs& in) {
  if (in.n < 1) throw AuditError(ErrorCode::kInvalidParameter, "bounds need |S| >= 1");
  if (in.t < 2) throw AuditError(ErrorCode::kInvalidParameter, "bounds need |T| >= 2");
  if (!(in.mu_diff > 0.0) || !std::isfinite(in.mu_diff)) {
    throw AuditError(ErrorCode::kInvalidParameter, "mu_diff must be positive");
  }
  if (!(in.gamma > 0.0) || !std::isfinite(in.gamma)) {
    throw AuditError(ErrorCode::kInvalidParameter, "gamma must be positive");
  }
}

}  // namespace detail

// 1 - 2 exp(-delta^2 mu_diff |T| / 6) (1 + exp(-delta^2 gamma |T| / 6)).
// delta = 0 is accepted and yields the degenerate raw value -3.
inline ProbabilityBound lemma1_success_probability(const BoundInputs& in) {
  detail::validate_bound_inputs(in);
  if (!in.delta) throw AuditError(ErrorCode::kInvalidParameter, "lemma bound needs delta");
  const double delta = *in.delta;
  if (!(delta >= 0.0)) throw AuditError(ErrorCode::kInvalidParameter, "delta must be >= 0");
  const double t = static_cast<double>(in.t);
  const double d2 = delta * delta;
  ProbabilityBound out;
  out.raw = 1.0 - 2.0 * std::exp(-d2 * in.mu_diff * t / 6.0) *
                      (1.0 + std::exp(-d2 * in.gamma * t / 6.0));
  out.clamped = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

// delta = sqrt(6 log(20 |S|) / (|T| min(mu_diff, gamma))), success
// probability 0.9 - 1 / (200 |S|).
inline TheoremBound theorem_delta(const BoundInputs& in) {
  detail::validate_bound_inputs(in);
  if (!(in.log_base > 0.0) || in.log_base == 1.0) {
    throw AuditError(ErrorCode::kInvalidParameter, "log base must be positive and != 1");
  }
  const double n = static_cast<double>(in.n);
  const double log20n = std::log(20.0 * n) / std::log(in.log_base);
  const double denom = static_cast<double>(in.t) * std::min(in.mu_diff, in.gamma);
  const double mu_same = in.mu_same.value_or(in.mu_diff + in.gamma);
  if (!(mu_same > in.mu_diff)) {
    throw AuditError(ErrorCode::kInvalidParameter, "mu_same must exceed mu_diff");
  }
  TheoremBound out;
  out.delta = std::sqrt(6.0 * log20n / denom);
  out.raw_error = out.delta * (mu_same + in.mu_diff);
  out.additive_error = out.raw_error / (mu_same - in.mu_diff);
  out.success_probability = 0.9 - 1.0 / (200.0 * n);
  return out;
}

// ---------------------------------------------------------------------------
// Estimator

// Within-group means exclude self pairs, so each group needs two members.
template <SimilarityMetric Metric>
NormStats norm_stats(const ControlSet& t, const Metric& metric) {
  if (t.t0.size() < 2 || t.t1.size() < 2) {
    throw AuditError(ErrorCode::kGroupTooSmall,
                     "norm_stats needs >= 2 per group, got " + std::to_string(t.t0.size()) +
                         " and " + std::to_string(t.t1.size()));
  }
  auto within = [&metric](const std::vector<FeatureVector>& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (i != j) sum += metric(g[i], g[j]);
      }
    }
    const double n = static_cast<double>(g.size());
    return sum / (n * (n - 1.0));
  };
  NormStats out;
  out.l = mean_sim_set_to_set(std::span<const FeatureVector>(t.t0),
                              std::span<const FeatureVector>(t.t1), metric);
  out.u0 = within(t.t0);
  out.u1 = within(t.t1);
  return out;
}

template <SimilarityMetric Metric>
ControlSet with_norm_stats(ControlSet t, const Metric& metric) {
  t.stats = norm_stats(t, metric);
  return t;
}

namespace detail {

// Builds the report from normalization statistics and running sums.
inline DisparityReport finish_divscore(const NormStats& stats, const RunningSums& sums,
                                       const ControlSet& t, const DivScoreOptions& opts) {
  if (sums.count == 0) throw AuditError(ErrorCode::kEmptySet, "divscore: empty collection");
  const double p0 = static_cast<double>(t.t0.size()) * static_cast<double>(t.t0.size() - 1);
  const double p1 = static_cast<double>(t.t1.size()) * static_cast<double>(t.t1.size() - 1);
  const double mu_same = (stats.u0 * p0 + stats.u1 * p1) / (p0 + p1);
  const double gamma_hat = mu_same - stats.l;
  const double gap0 = stats.u0 - stats.l;
  const double gap1 = stats.u1 - stats.l;
  if (std::abs(gap0) < opts.eps_norm || std::abs(gap1) < opts.eps_norm) {
    throw AuditError(ErrorCode::kDegenerateNormalization,
                     "u0 - l = " + std::to_string(gap0) + ", u1 - l = " +
                         std::to_string(gap1) + ", gamma_hat = " + std::to_string(gamma_hat));
  }
  const double n = static_cast<double>(sums.count);
  const double sim0 = sums.sum_t0 / n;
  const double sim1 = sums.sum_t1 / n;
  const double s0 = (sim0 - stats.l) / gap0;
  const double s1 = (sim1 - stats.l) / gap1;

  DisparityReport r;
  r.method = Method::kDivScore;
  r.norm_stats = stats;
  r.running = sums;
  r.raw_dhat = sim0 - sim1;
  r.estimate = s0 - s1;
  if (opts.clip) r.estimate = std::clamp(r.estimate, -1.0, 1.0);
  r.diagnostics["sim_s_t0"] = sim0;
  r.diagnostics["sim_s_t1"] = sim1;
  r.diagnostics["s0"] = s0;
  r.diagnostics["s1"] = s1;
  r.diagnostics["mu_same_hat"] = mu_same;
  r.diagnostics["mu_diff_hat"] = stats.l;
  r.diagnostics["gamma_hat"] = gamma_hat;
  if (opts.with_bounds && gamma_hat > 0.0 && stats.l > 0.0) {
    BoundInputs in;
    in.n = sums.count;
    in.t = t.size();
    in.mu_diff = stats.l;
    in.gamma = gamma_hat;
    in.mu_same = mu_same;
    in.log_base = opts.log_base;
    const TheoremBound b = theorem_delta(in);
    r.diagnostics["delta"] = b.delta;
    r.diagnostics["additive_error"] = b.additive_error;
    r.diagnostics["success_probability"] = b.success_probability;
  }
  return r;
}

template <SimilarityMetric Metric>
void accumulate(RunningSums& sums, const FeatureVector& x, const ControlSet& t,
                const Metric& metric, double sign) {
  sums.sum_t0 += sign * mean_sim_to_set(x, std::span<const FeatureVector>(t.t0), metric);
  sums.sum_t1 += sign * mean_sim_to_set(x, std::span<const FeatureVector>(t.t1), metric);
}

}  // namespace detail

template <SimilarityMetric Metric>
DisparityReport divscore(const Collection& s, const ControlSet& t, const Metric& metric,
                         const DivScoreOptions& opts = {}) {
  if (s.empty()) throw AuditError(ErrorCode::kEmptySet, "divscore: empty collection");
  const NormStats stats = t.stats ? *t.stats : norm_stats(t, metric);
  RunningSums sums;
  for (const auto& x : s.elements) detail::accumulate(sums, x, t, metric, 1.0);
  sums.count = s.size();
  return detail::finish_divscore(stats, sums, t, opts);
}

// Collection after erasing `removed_indices` (positions in `s`) and
// appending `added`.
inline Collection apply_update(const Collection& s, std::span<const FeatureVector> added,
                               std::span<const std::size_t> removed_indices) {
  std::vector<bool> drop(s.size(), false);
  for (std::size_t i : removed_indices) {
    if (i >= s.size()) {
      throw AuditError(ErrorCode::kIndexOutOfRange,
                       "index " + std::to_string(i) + " >= " + std::to_string(s.size()));
    }
    if (drop[i]) {
      throw AuditError(ErrorCode::kInvalidParameter,
                       "index " + std::to_string(i) + " removed twice");
    }
    drop[i] = true;
  }
  Collection out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!drop[i]) out.elements.push_back(s.elements[i]);
  }
  out.elements.insert(out.elements.end(), added.begin(), added.end());
  return out;
}

// Updates a divscore report for a changed collection in O((|added| +
// |removed|) |T|). `s` is the collection the report was computed on.
template <SimilarityMetric Metric>
DisparityReport incremental_update(const DisparityReport& report,
                                   std::span<const FeatureVector> added,
                                   std::span<const std::size_t> removed_indices,
                                   const Collection& s, const ControlSet& t,
                                   const Metric& metric, const DivScoreOptions& opts = {}) {
  if (!report.running || !report.norm_stats) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "incremental_update needs a divscore report with running sums");
  }
  if (report.running->count != s.size()) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "report was not computed on this collection");
  }
  std::vector<bool> seen(s.size(), false);
  for (std::size_t i : removed_indices) {
    if (i >= s.size()) {
      throw AuditError(ErrorCode::kIndexOutOfRange,
                       "index " + std::to_string(i) + " >= " + std::to_string(s.size()));
    }
    if (seen[i]) {
      throw AuditError(ErrorCode::kInvalidParameter,
                       "index " + std::to_string(i) + " removed twice");
    }
    seen[i] = true;
  }
  RunningSums sums = *report.running;
  for (std::size_t i : removed_indices) {
    detail::accumulate(sums, s.elements[i], t, metric, -1.0);
  }
  for (const auto& x : added) detail::accumulate(sums, x, t, metric, 1.0);
  sums.count = s.size() - removed_indices.size() + added.size();
  return detail::finish_divscore(*report.norm_stats, sums, t, opts);
}

}  // namespace divaudit

#endif  // DIVAUDIT_DIVSCORE_HPP_
