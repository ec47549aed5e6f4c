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

// Two isotropic Gaussian groups with known labels; ground truth for the
// statistical tests and the sweep harness.

#ifndef DIVAUDIT_SYNTHGEN_HPP_
#define DIVAUDIT_SYNTHGEN_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "divaudit/core.hpp"
#include "divaudit/errors.hpp"
#include "divaudit/random.hpp"

namespace divaudit {

struct SyntheticModel {
  std::size_t d = 2;
  FeatureVector mu0;
  FeatureVector mu1;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1 || mu0.dim() != d || mu1.dim() != d) {
      throw AuditError(ErrorCode::kDimensionMismatch, "model centers must have dimension d");
    }
    if (mu0.norm() == 0.0 || mu1.norm() == 0.0) {
      throw AuditError(ErrorCode::kZeroVector, "model centers must be nonzero");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw AuditError(ErrorCode::kInvalidParameter, "sigma must be finite and >= 0");
    }
  }

  const FeatureVector& center(Label z) const { return z == Label::kZero ? mu0 : mu1; }
};

// Unit centers e_0 and cos(angle) e_0 + sin(angle) e_1.
inline SyntheticModel make_angle_model(std::size_t d, double angle_degrees, double sigma,
                                       std::uint64_t seed = 0) {
  if (d < 2) throw AuditError(ErrorCode::kInvalidParameter, "angle model needs d >= 2");
  const double theta = angle_degrees * std::numbers::pi / 180.0;
  std::vector<double> c0(d, 0.0);
  std::vector<double> c1(d, 0.0);
  c0[0] = 1.0;
  c1[0] = std::cos(theta);
  c1[1] = std::sin(theta);
  SyntheticModel m{d, FeatureVector(std::move(c0)), FeatureVector(std::move(c1)), sigma, seed};
  m.validate();
  return m;
}

inline FeatureVector sample_point(const SyntheticModel& model, Label z, Rng& rng) {
  const auto mu = model.center(z).values();
  std::vector<double> v(mu.begin(), mu.end());
  for (double& x : v) x += model.sigma * rng.normal();
  return FeatureVector(std::move(v));
}

// round(f * n) with halves rounded up.
inline std::size_t group0_count(std::size_t n, double f) {
  return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 0.5));
}

// n0 draws from group 0 followed by n1 from group 1, then shuffled.
inline std::vector<LabeledExample> sample_labeled(const SyntheticModel& model, std::size_t n0,
                                                  std::size_t n1, Rng& rng) {
  model.validate();
  std::vector<LabeledExample> out;
  out.reserve(n0 + n1);
  for (std::size_t i = 0; i < n0; ++i) out.push_back({sample_point(model, Label::kZero, rng), Label::kZero});
  for (std::size_t i = 0; i < n1; ++i) out.push_back({sample_point(model, Label::kOne, rng), Label::kOne});
  shuffle(out, rng);
  return out;
}

inline Collection to_collection(const std::vector<LabeledExample>& labeled) {
  Collection s;
  std::vector<Label> labels;
  s.elements.reserve(labeled.size());
  labels.reserve(labeled.size());
  for (const auto& e : labeled) {
    s.elements.push_back(e.x);
    labels.push_back(e.z);
  }
  s.hidden_labels = std::move(labels);
  return s;
}

inline std::vector<LabeledExample> to_labeled(const Collection& s) {
  if (!s.hidden_labels) {
    throw AuditError(ErrorCode::kInvalidParameter, "collection has no labels");
  }
  std::vector<LabeledExample> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s.elements[i], (*s.hidden_labels)[i]});
  return out;
}

inline Collection generate_collection(const SyntheticModel& model, std::size_t n, double f,
                                      Rng& rng) {
  if (n < 1) throw AuditError(ErrorCode::kInvalidParameter, "collection size must be >= 1");
  if (!(f >= 0.0 && f <= 1.0)) {
    throw AuditError(ErrorCode::kInvalidParameter, "f must lie in [0, 1]");
  }
  const std::size_t n0 = group0_count(n, f);
  return to_collection(sample_labeled(model, n0, n - n0, rng));
}

inline Collection generate_collection(const SyntheticModel& model, std::size_t n, double f) {
  Rng rng(model.seed);
  return generate_collection(model, n, f, rng);
}

inline constexpr std::size_t kMinGammaSamples = 100;

template <SimilarityMetric Metric = CosinePlusOne>
double expected_gamma(const SyntheticModel& model, std::size_t n_mc, Rng& rng,
                      const Metric& metric = {}) {
  if (n_mc < kMinGammaSamples) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "expected_gamma needs n_mc >= " + std::to_string(kMinGammaSamples));
  }
  const auto sample = sample_labeled(model, n_mc, n_mc, rng);
  return estimate_gamma(std::span<const LabeledExample>(sample), metric).gamma;
}

// Noise level at which the model's gamma equals target_gamma, by bisection. The noise
// draws are fixed up front (common random numbers), which makes the
// Monte-Carlo gamma a deterministic, continuous function of sigma.
template <SimilarityMetric Metric = CosinePlusOne>
double calibrate_sigma(const SyntheticModel& base, double target_gamma, std::size_t n_mc,
                       std::uint64_t seed, const Metric& metric = {}) {
  base.validate();
  if (n_mc < kMinGammaSamples) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "calibrate_sigma needs n_mc >= " + std::to_string(kMinGammaSamples));
  }
  Rng rng(seed);
  std::vector<std::vector<double>> noise(2 * n_mc, std::vector<double>(base.d));
  for (auto& row : noise) {
    for (double& v : row) v = rng.normal();
  }
  auto gamma_at = [&](double sigma) {
    std::vector<LabeledExample> pts;
    pts.reserve(2 * n_mc);
    for (std::size_t i = 0; i < 2 * n_mc; ++i) {
      const Label z = i < n_mc ? Label::kZero : Label::kOne;
      const auto mu = base.center(z).values();
      std::vector<double> v(base.d);
      for (std::size_t j = 0; j < base.d; ++j) v[j] = mu[j] + sigma * noise[i][j];
      pts.push_back({FeatureVector(std::move(v)), z});
    }
    return estimate_gamma(std::span<const LabeledExample>(pts), metric).gamma;
  };
  if (!(target_gamma > 0.0) || target_gamma >= gamma_at(0.0)) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "target gamma must lie in (0, gamma at sigma = 0)");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (gamma_at(hi) > target_gamma) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw AuditError(ErrorCode::kInvalidParameter, "calibration diverged");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gamma_at(mid) > target_gamma ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace divaudit

#endif  // DIVAUDIT_SYNTHGEN_HPP_
