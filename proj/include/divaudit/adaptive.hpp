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

// Adaptive control sets.
//
// Every labeled auxiliary element y in U_i gets a separation score
//
//   gamma_i(y) = mean_{x in U_i \ {y}} sim(x, y) - mean_{x in U_{1-i}} sim(x, y)
//
// and each T_i is filled greedily with the candidate maximizing
// gamma_i(x) - alpha * max_{y in T_i} sim(x, y), a maximal-marginal-relevance
// trade-off between separation and redundancy. The redundancy term is 0
// while T_i is empty; equal scores go to the lowest candidate index.

#ifndef DIVAUDIT_ADAPTIVE_HPP_
#define DIVAUDIT_ADAPTIVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "divaudit/core.hpp"
#include "divaudit/errors.hpp"

namespace divaudit {

struct AuxiliarySet {
  std::vector<FeatureVector> u0;
  std::vector<FeatureVector> u1;

  static AuxiliarySet from_labeled(std::span<const LabeledExample> labeled) {
    auto [g0, g1] = split_by_label(labeled);
    return AuxiliarySet{std::move(g0), std::move(g1)};
  }

  const std::vector<FeatureVector>& group(Label z) const {
    return z == Label::kZero ? u0 : u1;
  }
};

enum class TieBreak { kLowestIndex };

struct AdaptiveConfig {
  std::size_t m = 50;
  double alpha = 1.0;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

// Defaults used for image-like and text-like embeddings respectively.
inline constexpr double kImageAlpha = 1.0;
inline constexpr double kTextAlpha = 0.1;

struct PerElementGamma {
  std::vector<double> scores0;
  std::vector<double> scores1;
};

template <SimilarityMetric Metric>
PerElementGamma per_element_gamma(const AuxiliarySet& u, const Metric& metric) {
  if (u.u0.size() < 2 || u.u1.size() < 2) {
    throw AuditError(ErrorCode::kGroupTooSmall,
                     "per_element_gamma needs >= 2 per group, got " +
                         std::to_string(u.u0.size()) + " and " + std::to_string(u.u1.size()));
  }
  auto score_group = [&metric](const std::vector<FeatureVector>& same,
                               const std::vector<FeatureVector>& other) {
    std::vector<double> out(same.size());
    for (std::size_t c = 0; c < same.size(); ++c) {
      double within = 0.0;
      for (std::size_t j = 0; j < same.size(); ++j) {
        if (j != c) within += metric(same[c], same[j]);
      }
      double across = 0.0;
      for (const auto& y : other) across += metric(same[c], y);
      out[c] = within / static_cast<double>(same.size() - 1) -
               across / static_cast<double>(other.size());
    }
    return out;
  };
  PerElementGamma out;
  out.scores0 = score_group(u.u0, u.u1);
  out.scores1 = score_group(u.u1, u.u0);
  return out;
}

// Positions in u0 / u1 of the selected elements, in selection order.
struct AdaptiveSelection {
  std::vector<std::size_t> indices0;
  std::vector<std::size_t> indices1;
};

inline void validate_adaptive_config(const AuxiliarySet& u, const AdaptiveConfig& cfg) {
  if (cfg.m < 2 || cfg.m % 2 != 0) {
    throw AuditError(ErrorCode::kInfeasibleConfig,
                     "control size must be a positive even number, got " + std::to_string(cfg.m));
  }
  if (cfg.m / 2 > std::min(u.u0.size(), u.u1.size())) {
    throw AuditError(ErrorCode::kInfeasibleConfig,
                     "control size " + std::to_string(cfg.m) + " exceeds twice the smaller group (" +
                         std::to_string(std::min(u.u0.size(), u.u1.size())) + ")");
  }
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) {
    throw AuditError(ErrorCode::kInfeasibleConfig, "alpha must be finite and >= 0");
  }
}

namespace detail {

template <SimilarityMetric Metric>
std::vector<std::size_t> greedy_mmr(const std::vector<FeatureVector>& candidates,
                                    std::span<const double> scores, std::size_t picks,
                                    double alpha, const Metric& metric) {
  const std::size_t n = candidates.size();
  std::vector<bool> taken(n, false);
  std::vector<double> redundancy(n, 0.0);  // max sim to the picks so far
  std::vector<std::size_t> chosen;
  chosen.reserve(picks);
  while (chosen.size() < picks) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      const double score = scores[c] - alpha * redundancy[c];
      if (best == n || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    taken[best] = true;
    chosen.push_back(best);
    for (std::size_t c = 0; c < n; ++c) {
      if (taken[c]) continue;
      const double s = metric(candidates[c], candidates[best]);
      redundancy[c] = chosen.size() == 1 ? s : std::max(redundancy[c], s);
    }
  }
  return chosen;
}

}  // namespace detail

template <SimilarityMetric Metric>
AdaptiveSelection select_adaptive(const AuxiliarySet& u, const AdaptiveConfig& cfg,
                                  const Metric& metric) {
  validate_adaptive_config(u, cfg);
  const PerElementGamma gamma = per_element_gamma(u, metric);
  AdaptiveSelection sel;
  sel.indices0 = detail::greedy_mmr(u.u0, gamma.scores0, cfg.m / 2, cfg.alpha, metric);
  sel.indices1 = detail::greedy_mmr(u.u1, gamma.scores1, cfg.m / 2, cfg.alpha, metric);
  return sel;
}

template <SimilarityMetric Metric>
ControlSet build_adaptive_control(const AuxiliarySet& u, const AdaptiveConfig& cfg,
                                  const Metric& metric) {
  const AdaptiveSelection sel = select_adaptive(u, cfg, metric);
  ControlSet t;
  for (std::size_t i : sel.indices0) t.t0.push_back(u.u0[i]);
  for (std::size_t i : sel.indices1) t.t1.push_back(u.u1[i]);
  return t;
}

// Empirical separation power of a control set on held-out labeled data:
// the average over i of mean_{x in H_i} sim(x, T_i) - mean_{x in H_{1-i}} sim(x, T_i).
template <SimilarityMetric Metric>
double gamma_of_control(const ControlSet& t, std::span<const LabeledExample> holdout,
                        const Metric& metric) {
  if (t.t0.empty() || t.t1.empty()) {
    throw AuditError(ErrorCode::kEmptySet, "gamma_of_control: control group is empty");
  }
  double sum[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [holdout label][control group]
  std::size_t count[2] = {0, 0};
  for (const auto& e : holdout) {
    const int z = to_int(e.z);
    sum[z][0] += mean_sim_to_set(e.x, std::span<const FeatureVector>(t.t0), metric);
    sum[z][1] += mean_sim_to_set(e.x, std::span<const FeatureVector>(t.t1), metric);
    ++count[z];
  }
  if (count[0] == 0 || count[1] == 0) {
    throw AuditError(ErrorCode::kInsufficientClassExamples,
                     "gamma_of_control needs both labels in the holdout");
  }
  const double n0 = static_cast<double>(count[0]);
  const double n1 = static_cast<double>(count[1]);
  const double gap0 = sum[0][0] / n0 - sum[1][0] / n1;
  const double gap1 = sum[1][1] / n1 - sum[0][1] / n0;
  return 0.5 * (gap0 + gap1);
}

}  // namespace divaudit

#endif  // DIVAUDIT_ADAPTIVE_HPP_
