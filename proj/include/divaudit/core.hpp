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

// Domain types and similarity kernels shared by every estimator.
//
// A collection S is an ordered list of embeddings. The quantity of interest
// is its disparity d(S) = (|S_0| - |S_1|) / |S| with respect to a binary
// protected attribute z. The estimators never see z for members of S; they
// compare S against a small labeled control set T = T_0 u T_1 through a
// pairwise similarity metric.

#ifndef DIVAUDIT_CORE_HPP_
#define DIVAUDIT_CORE_HPP_

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "divaudit/errors.hpp"

namespace divaudit {

enum class Label : std::uint8_t { kZero = 0, kOne = 1 };

inline Label label_from_int(long long value) {
  if (value == 0) return Label::kZero;
  if (value == 1) return Label::kOne;
  throw AuditError(ErrorCode::kInvalidParameter,
                   "label must be 0 or 1, got " + std::to_string(value));
}

constexpr int to_int(Label z) { return static_cast<int>(z); }
constexpr Label opposite(Label z) {
  return z == Label::kZero ? Label::kOne : Label::kZero;
}

// Dense embedding. Entries are finite and the dimension is at least one; the
// Euclidean norm is computed once on construction.
class FeatureVector {
 public:
  FeatureVector() = default;

  explicit FeatureVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw AuditError(ErrorCode::kInvalidParameter, "feature vector has dimension 0");
    }
    double sq = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) {
        throw AuditError(ErrorCode::kNonFinite, "feature vector has a non-finite entry");
      }
      sq += v * v;
    }
    norm_ = std::sqrt(sq);
  }

  FeatureVector(std::initializer_list<double> values)
      : FeatureVector(std::vector<double>(values)) {}

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double norm() const { return norm_; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Same direction, new length; used by scale-invariance checks.
  FeatureVector scaled(double factor) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= factor;
    return FeatureVector(std::move(out));
  }

  friend bool operator==(const FeatureVector& a, const FeatureVector& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

struct LabeledExample {
  FeatureVector x;
  Label z = Label::kZero;
};

// Audited collection. hidden_labels are only read by evaluation oracles.
struct Collection {
  std::vector<FeatureVector> elements;
  std::optional<std::vector<Label>> hidden_labels;

  std::size_t size() const { return elements.size(); }
  bool empty() const { return elements.empty(); }

  void validate() const {
    if (hidden_labels && hidden_labels->size() != elements.size()) {
      throw AuditError(ErrorCode::kInvalidParameter,
                       "hidden_labels length differs from collection size");
    }
    for (const auto& x : elements) {
      if (x.dim() != elements.front().dim()) {
        throw AuditError(ErrorCode::kDimensionMismatch, "collection has mixed dimensions");
      }
    }
  }
};

// Mean cross-group similarity l and mean within-group similarities u0, u1.
struct NormStats {
  double l = 0.0;
  double u0 = 0.0;
  double u1 = 0.0;
};

struct ControlSet {
  std::vector<FeatureVector> t0;
  std::vector<FeatureVector> t1;
  std::optional<NormStats> stats;

  std::size_t size() const { return t0.size() + t1.size(); }

  const std::vector<FeatureVector>& group(Label z) const {
    return z == Label::kZero ? t0 : t1;
  }
  std::vector<FeatureVector>& group(Label z) { return z == Label::kZero ? t0 : t1; }

  std::vector<LabeledExample> as_labeled() const {
    std::vector<LabeledExample> out;
    out.reserve(size());
    for (const auto& x : t0) out.push_back({x, Label::kZero});
    for (const auto& x : t1) out.push_back({x, Label::kOne});
    return out;
  }
};

// A similarity metric is a pure, symmetric, nonnegative binary function with
// a known finite upper bound.
template <typename M>
concept SimilarityMetric = requires(const M& metric, const FeatureVector& a,
                                    const FeatureVector& b) {
  { metric(a, b) } -> std::convertible_to<double>;
  { metric.upper_bound() } -> std::convertible_to<double>;
};

// 1 + cos(a, b), in [0, 2].
inline double cosine_plus_one(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) {
    throw AuditError(ErrorCode::kDimensionMismatch,
                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  if (a.norm() == 0.0 || b.norm() == 0.0) {
    throw AuditError(ErrorCode::kZeroVector, "cosine similarity of a zero vector");
  }
  const auto va = a.values();
  const auto vb = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
  double cos = dot / (a.norm() * b.norm());
  // Rounding can push |cos| a hair past 1.
  if (cos > 1.0) cos = 1.0;
  if (cos < -1.0) cos = -1.0;
  return 1.0 + cos;
}

struct CosinePlusOne {
  static constexpr const char* kName = "cosine1";
  double operator()(const FeatureVector& a, const FeatureVector& b) const {
    return cosine_plus_one(a, b);
  }
  double upper_bound() const { return 2.0; }
};

template <SimilarityMetric Metric>
double mean_sim_to_set(const FeatureVector& x, std::span<const FeatureVector> ts,
                       const Metric& metric) {
  if (ts.empty()) throw AuditError(ErrorCode::kEmptySet, "mean_sim_to_set: empty set");
  double sum = 0.0;
  for (const auto& y : ts) sum += metric(x, y);
  return sum / static_cast<double>(ts.size());
}

// Mean over all |s| * |ts| pairs, accumulated in input order.
template <SimilarityMetric Metric>
double mean_sim_set_to_set(std::span<const FeatureVector> s,
                           std::span<const FeatureVector> ts, const Metric& metric) {
  if (s.empty() || ts.empty()) {
    throw AuditError(ErrorCode::kEmptySet, "mean_sim_set_to_set: empty set");
  }
  double sum = 0.0;
  for (const auto& x : s) {
    for (const auto& y : ts) sum += metric(x, y);
  }
  return sum / (static_cast<double>(s.size()) * static_cast<double>(ts.size()));
}

inline double true_disparity(std::span<const Label> labels) {
  if (labels.empty()) throw AuditError(ErrorCode::kEmptySet, "true_disparity: no labels");
  long long zeros = 0;
  for (Label z : labels) zeros += (z == Label::kZero);
  const long long ones = static_cast<long long>(labels.size()) - zeros;
  return static_cast<double>(zeros - ones) / static_cast<double>(labels.size());
}

struct GammaEstimate {
  double mu_same = 0.0;   // pooled over both classes
  double mu_diff = 0.0;
  double gamma = 0.0;     // mu_same - mu_diff; negative means the metric is useless
  double mu_same0 = 0.0;  // per-class diagnostics
  double mu_same1 = 0.0;
};

template <SimilarityMetric Metric>
GammaEstimate estimate_gamma(std::span<const LabeledExample> labeled,
                             const Metric& metric) {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  for (const auto& e : labeled) (e.z == Label::kZero ? n0 : n1)++;
  if (n0 < 2 || n1 < 2) {
    throw AuditError(ErrorCode::kInsufficientClassExamples,
                     "estimate_gamma needs >= 2 examples per class, got " +
                         std::to_string(n0) + " and " + std::to_string(n1));
  }
  double same0 = 0.0;
  double same1 = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    for (std::size_t j = i + 1; j < labeled.size(); ++j) {
      const double s = metric(labeled[i].x, labeled[j].x);
      if (labeled[i].z != labeled[j].z) {
        diff += s;
      } else if (labeled[i].z == Label::kZero) {
        same0 += s;
      } else {
        same1 += s;
      }
    }
  }
  const double pairs0 = static_cast<double>(n0) * static_cast<double>(n0 - 1) / 2.0;
  const double pairs1 = static_cast<double>(n1) * static_cast<double>(n1 - 1) / 2.0;
  GammaEstimate out;
  out.mu_same0 = same0 / pairs0;
  out.mu_same1 = same1 / pairs1;
  out.mu_same = (same0 + same1) / (pairs0 + pairs1);
  out.mu_diff = diff / (static_cast<double>(n0) * static_cast<double>(n1));
  out.gamma = out.mu_same - out.mu_diff;
  return out;
}

// Splits labeled examples into (group 0, group 1) preserving input order.
inline std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> split_by_label(
    std::span<const LabeledExample> labeled) {
  std::pair<std::vector<FeatureVector>, std::vector<FeatureVector>> out;
  for (const auto& e : labeled) {
    (e.z == Label::kZero ? out.first : out.second).push_back(e.x);
  }
  return out;
}

}  // namespace divaudit

#endif  // DIVAUDIT_CORE_HPP_
