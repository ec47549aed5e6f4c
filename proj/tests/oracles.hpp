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

// Test-only reference implementations. They work on plain nested vectors in
// long double and share no code with the library beyond FeatureVector
// accessors, so agreement is evidence rather than tautology.

#ifndef DIVAUDIT_TESTS_ORACLES_HPP_
#define DIVAUDIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "divaudit/core.hpp"

namespace oracle {

using Vec = std::vector<long double>;

inline Vec raw(const divaudit::FeatureVector& x) {
  return Vec(x.values().begin(), x.values().end());
}

inline std::vector<Vec> raw(const std::vector<divaudit::FeatureVector>& xs) {
  std::vector<Vec> out;
  for (const auto& x : xs) out.push_back(raw(x));
  return out;
}

inline long double cos1(const Vec& a, const Vec& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return 1.0L + dot / std::sqrt(na * nb);
}

// Mean over every pair of A x B, optionally skipping the diagonal (A == B).
inline long double pair_mean(const std::vector<Vec>& a, const std::vector<Vec>& b,
                             bool skip_diagonal = false) {
  long double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (skip_diagonal && i == j) continue;
      sum += cos1(a[i], b[j]);
      ++count;
    }
  }
  return sum / static_cast<long double>(count);
}

// Literal transcription of the normalized estimator.
inline long double divscore(const std::vector<Vec>& s, const std::vector<Vec>& t0,
                            const std::vector<Vec>& t1) {
  const long double l = pair_mean(t0, t1);
  const long double u0 = pair_mean(t0, t0, true);
  const long double u1 = pair_mean(t1, t1, true);
  const long double s0 = (pair_mean(s, t0) - l) / (u0 - l);
  const long double s1 = (pair_mean(s, t1) - l) / (u1 - l);
  return s0 - s1;
}

struct SelfTrainingTrace {
  long double estimate = 0;
  std::size_t iterations = 0;
};

// Self-training with every score recomputed from scratch each round.
inline SelfTrainingTrace self_training(std::vector<Vec> s, std::vector<Vec> t0,
                                       std::vector<Vec> t1, std::size_t k) {
  const std::size_t n = s.size();
  std::vector<std::size_t> left(n);
  for (std::size_t i = 0; i < n; ++i) left[i] = i;
  long n0 = 0, n1 = 0;
  SelfTrainingTrace out;
  std::vector<Vec> orig = s;
  while (!left.empty()) {
    ++out.iterations;
    std::vector<std::pair<long double, std::size_t>> scored;
    for (std::size_t i : left) {
      long double a = 0, b = 0;
      for (const auto& y : t0) a += cos1(orig[i], y);
      for (const auto& y : t1) b += cos1(orig[i], y);
      scored.push_back({a / t0.size() - b / t1.size(), i});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
      return std::fabs(x.first) > std::fabs(y.first);
    });
    const std::size_t take = std::min(k, scored.size());
    std::vector<std::size_t> gone;
    for (std::size_t j = 0; j < take; ++j) {
      const auto [score, i] = scored[j];
      if (score > 0) {
        ++n0;
        t0.push_back(orig[i]);
      } else if (score < 0) {
        ++n1;
        t1.push_back(orig[i]);
      }
      gone.push_back(i);
    }
    std::erase_if(left, [&gone](std::size_t i) {
      return std::find(gone.begin(), gone.end(), i) != gone.end();
    });
  }
  out.estimate = n == 0 ? 0.0L : static_cast<long double>(n0 - n1) / n;
  return out;
}

}  // namespace oracle

#endif  // DIVAUDIT_TESTS_ORACLES_HPP_
