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

// Comparison estimators and random control-set samplers.

#ifndef DIVAUDIT_BASELINES_HPP_
#define DIVAUDIT_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divaudit/core.hpp"
#include "divaudit/divscore.hpp"
#include "divaudit/errors.hpp"
#include "divaudit/random.hpp"

namespace divaudit {

enum class SamplerMode { kBalanced, kProportional };

struct SamplerConfig {
  std::size_t size = 50;
  SamplerMode mode = SamplerMode::kBalanced;
  std::uint64_t seed = 0;
};

// Block sampling: size/2 uniform draws without replacement from each class.
inline ControlSet sample_random_balanced(std::span<const LabeledExample> pool,
                                         const SamplerConfig& cfg, Rng& rng) {
  if (cfg.size < 2 || cfg.size % 2 != 0) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "balanced control size must be a positive even number");
  }
  std::vector<std::size_t> idx[2];
  for (std::size_t i = 0; i < pool.size(); ++i) idx[to_int(pool[i].z)].push_back(i);
  const std::size_t half = cfg.size / 2;
  if (idx[0].size() < half || idx[1].size() < half) {
    throw AuditError(ErrorCode::kInsufficientClassExamples,
                     "balanced sampling of " + std::to_string(cfg.size) + " needs " +
                         std::to_string(half) + " per class, pool has " +
                         std::to_string(idx[0].size()) + " and " + std::to_string(idx[1].size()));
  }
  ControlSet t;
  for (int z = 0; z < 2; ++z) {
    auto& out = z == 0 ? t.t0 : t.t1;
    for (std::size_t k : sample_indices(idx[z].size(), half, rng)) {
      out.push_back(pool[idx[z][k]].x);
    }
  }
  return t;
}

// size uniform draws without replacement from the labeled collection,
// partitioned by label. Either side may come back empty.
inline ControlSet sample_random_proportional(std::span<const LabeledExample> collection,
                                             const SamplerConfig& cfg, Rng& rng) {
  if (cfg.size < 1) {
    throw AuditError(ErrorCode::kInvalidParameter, "control size must be positive");
  }
  if (cfg.size > collection.size()) {
    throw AuditError(ErrorCode::kInsufficientExamples,
                     "cannot draw " + std::to_string(cfg.size) + " from a collection of " +
                         std::to_string(collection.size()));
  }
  ControlSet t;
  for (std::size_t i : sample_indices(collection.size(), cfg.size, rng)) {
    t.group(collection[i].z).push_back(collection[i].x);
  }
  return t;
}

// Dispatches on cfg.mode with a generator seeded from cfg.seed.
inline ControlSet sample_control(std::span<const LabeledExample> pool,
                                 const SamplerConfig& cfg) {
  Rng rng(cfg.seed);
  return cfg.mode == SamplerMode::kBalanced ? sample_random_balanced(pool, cfg, rng)
                                            : sample_random_proportional(pool, cfg, rng);
}

// Disparity of the (proportionally sampled) control set itself.
inline DisparityReport iid_measure(const ControlSet& t) {
  if (t.size() == 0) throw AuditError(ErrorCode::kEmptySet, "iid_measure: empty control set");
  DisparityReport r;
  r.method = Method::kIid;
  r.estimate = (static_cast<double>(t.t0.size()) - static_cast<double>(t.t1.size())) /
               static_cast<double>(t.size());
  r.raw_dhat = r.estimate;
  r.diagnostics["control_size"] = static_cast<double>(t.size());
  return r;
}

inline constexpr std::size_t kDefaultSelfTrainingBatch = 5;

// Semi-supervised self-training. Each round scores every remaining element
// by s(x) = sim(x, T_0) - sim(x, T_1), takes the k largest |s(x)| (ties to
// the lowest position in S; fewer than k when fewer remain), counts them as
// group 0 if s > 0 and group 1 if s < 0, and moves them into the matching
// half of T. Elements with s = 0 are dropped uncounted. The result is
// (n0 - n1) / N with N the original collection size.
//
// Per-element sums against T are carried across rounds and extended with
// the newly absorbed elements only; the summation order matches a fresh
// pass over T in insertion order.
template <SimilarityMetric Metric>
DisparityReport ss_st(const Collection& s, const ControlSet& t, const Metric& metric,
                      std::size_t k = kDefaultSelfTrainingBatch) {
  if (k == 0) throw AuditError(ErrorCode::kInvalidParameter, "ss_st needs k >= 1");
  const std::size_t n = s.size();
  DisparityReport r;
  r.method = Method::kSsSt;
  if (n == 0) {
    r.diagnostics["iterations"] = 0.0;
    return r;
  }
  if (t.t0.empty() || t.t1.empty()) {
    throw AuditError(ErrorCode::kEmptySet, "ss_st: control group is empty");
  }

  std::vector<double> sum0(n, 0.0);
  std::vector<double> sum1(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& y : t.t0) sum0[i] += metric(s.elements[i], y);
    for (const auto& y : t.t1) sum1[i] += metric(s.elements[i], y);
  }
  double size0 = static_cast<double>(t.t0.size());
  double size1 = static_cast<double>(t.t1.size());

  std::vector<std::size_t> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = i;
  std::vector<double> score(n, 0.0);
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t zero = 0;
  std::size_t iterations = 0;
  std::vector<std::size_t> added0;
  std::vector<std::size_t> added1;
  std::vector<std::size_t> order;
  std::vector<bool> picked(n, false);

  while (!remaining.empty()) {
    ++iterations;
    for (std::size_t i : remaining) score[i] = sum0[i] / size0 - sum1[i] / size1;
    const std::size_t take = std::min(k, remaining.size());
    auto by_confidence = [&score](std::size_t a, std::size_t b) {
      const double sa = std::abs(score[a]);
      const double sb = std::abs(score[b]);
      return sa != sb ? sa > sb : a < b;
    };
    order.assign(remaining.begin(), remaining.end());
    std::partial_sort(order.begin(), order.begin() + take, order.end(), by_confidence);
    added0.clear();
    added1.clear();
    for (std::size_t j = 0; j < take; ++j) {
      const std::size_t i = order[j];
      picked[i] = true;
      if (score[i] > 0.0) {
        ++n0;
        added0.push_back(i);
      } else if (score[i] < 0.0) {
        ++n1;
        added1.push_back(i);
      } else {
        ++zero;
      }
    }
    // Stable, so later ties still resolve by position in S.
    std::erase_if(remaining, [&picked](std::size_t i) { return picked[i]; });
    for (std::size_t i : remaining) {
      for (std::size_t a : added0) sum0[i] += metric(s.elements[i], s.elements[a]);
      for (std::size_t a : added1) sum1[i] += metric(s.elements[i], s.elements[a]);
    }
    size0 += static_cast<double>(added0.size());
    size1 += static_cast<double>(added1.size());
  }

  r.estimate = (static_cast<double>(n0) - static_cast<double>(n1)) / static_cast<double>(n);
  r.raw_dhat = r.estimate;
  r.diagnostics["iterations"] = static_cast<double>(iterations);
  r.diagnostics["n0"] = static_cast<double>(n0);
  r.diagnostics["n1"] = static_cast<double>(n1);
  r.diagnostics["unassigned"] = static_cast<double>(zero);
  return r;
}

}  // namespace divaudit

#endif  // DIVAUDIT_BASELINES_HPP_
