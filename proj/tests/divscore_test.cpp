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

#include "divaudit/divscore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "divaudit/synthgen.hpp"
#include "generators.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace divaudit {
namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const AuditError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an AuditError";
  return ErrorCode::kParseError;
}

ControlSet two_plus_two() {
  ControlSet t;
  t.t0 = {{1, 0}, {1, 0}};
  t.t1 = {{0, 1}, {0, 1}};
  return t;
}

Collection of(std::vector<FeatureVector> xs) {
  Collection s;
  s.elements = std::move(xs);
  return s;
}

TEST(NormStatsTest, TwoPlusTwo) {
  const NormStats st = norm_stats(two_plus_two(), CosinePlusOne{});
  EXPECT_DOUBLE_EQ(st.l, 1.0);
  EXPECT_DOUBLE_EQ(st.u0, 2.0);
  EXPECT_DOUBLE_EQ(st.u1, 2.0);
}

// With T_0 = T_1 the within-group means coincide; the cross mean differs
// only by the self pairs it includes: l = ((n - 1) u + 2) / n.
TEST(NormStatsTest, IdenticalGroupsDifferOnlyBySelfPairs) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    ControlSet t;
    t.t0 = gen::vectors(2 + rng.uniform_index(8), 5, rng);
    t.t1 = t.t0;
    const NormStats st = norm_stats(t, CosinePlusOne{});
    const double n = static_cast<double>(t.t0.size());
    EXPECT_DOUBLE_EQ(st.u0, st.u1);
    EXPECT_NEAR(st.l, ((n - 1.0) * st.u0 + 2.0) / n, 1e-13);
    EXPECT_NEAR(st.l, static_cast<double>(oracle::pair_mean(oracle::raw(t.t0), oracle::raw(t.t1))),
                1e-13);
  }
}

TEST(NormStatsTest, WithinMetricRangeAndNeedsTwoPerGroup) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    ControlSet t;
    t.t0 = gen::vectors(2 + rng.uniform_index(10), 4, rng);
    t.t1 = gen::vectors(2 + rng.uniform_index(10), 4, rng);
    const NormStats st = norm_stats(t, CosinePlusOne{});
    for (double v : {st.l, st.u0, st.u1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 2.0);
    }
  }
  ControlSet small = two_plus_two();
  small.t1.pop_back();
  EXPECT_EQ(code_of([&] { norm_stats(small, CosinePlusOne{}); }), ErrorCode::kGroupTooSmall);
}

TEST(DivScoreTest, CollectionOfGroupZeroScoresOne) {
  const ControlSet t = two_plus_two();
  const DisparityReport r = divscore(of({{1, 0}, {1, 0}}), t, CosinePlusOne{});
  EXPECT_DOUBLE_EQ(r.diagnostics.at("s0"), 1.0);
  EXPECT_DOUBLE_EQ(r.diagnostics.at("s1"), 0.0);
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_DOUBLE_EQ(r.raw_dhat, 1.0);
  EXPECT_EQ(r.method, Method::kDivScore);
}

// Three group-0 points and one group-1 point: sim(S,T0) = 7/4, sim(S,T1) = 5/4.
TEST(DivScoreTest, FourElementHandExample) {
  const DisparityReport r =
      divscore(of({{1, 0}, {1, 0}, {1, 0}, {0, 1}}), two_plus_two(), CosinePlusOne{});
  EXPECT_NEAR(r.diagnostics.at("sim_s_t0"), 1.75, 1e-15);
  EXPECT_NEAR(r.diagnostics.at("sim_s_t1"), 1.25, 1e-15);
  EXPECT_NEAR(r.estimate, 0.5, 1e-15);
}

TEST(DivScoreTest, SymmetricCollectionScoresZero) {
  const DisparityReport r =
      divscore(of({{1, 0}, {0, 1}, {2, 0}, {0, 3}}), two_plus_two(), CosinePlusOne{});
  EXPECT_NEAR(r.estimate, 0.0, 1e-15);
}

TEST(DivScoreTest, MatchesLiteralOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto labeled = gen::clusters(3 + rng.uniform_index(6), 3 + rng.uniform_index(6), 5, 0.4, rng);
    auto [t0, t1] = split_by_label(std::span<const LabeledExample>(labeled));
    const auto s = gen::vectors(1 + rng.uniform_index(30), 5, rng);
    ControlSet t{t0, t1, std::nullopt};
    const double want = static_cast<double>(oracle::divscore(oracle::raw(s), oracle::raw(t0), oracle::raw(t1)));
    EXPECT_NEAR(divscore(of(s), t, CosinePlusOne{}).estimate, want, 1e-10);
  }
}

TEST(DivScoreTest, Errors) {
  EXPECT_EQ(code_of([] { divscore(Collection{}, two_plus_two(), CosinePlusOne{}); }),
            ErrorCode::kEmptySet);
  ControlSet flat;
  flat.t0 = {{1, 1}, {2, 2}};
  flat.t1 = {{3, 3}, {1, 1}};
  EXPECT_EQ(code_of([&] { divscore(of({{1, 0}}), flat, CosinePlusOne{}); }),
            ErrorCode::kDegenerateNormalization);
}

TEST(DivScoreTest, ClipOnlyWhenAsked) {
  // A point beyond the group-0 prototype direction pushes s0 past 1.
  ControlSet t;
  t.t0 = {{1, 0.2}, {1, -0.2}};
  t.t1 = {{0, 1}, {0.2, 1}};
  const Collection s = of({{1, 0}, {1, 0}});
  const double raw = divscore(s, t, CosinePlusOne{}).estimate;
  ASSERT_GT(raw, 1.0);
  DivScoreOptions opts;
  opts.clip = true;
  EXPECT_EQ(divscore(s, t, CosinePlusOne{}, opts).estimate, 1.0);
}

TEST(DivScoreTest, InvariantUnderPermutationScalingAndRelabeling) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto labeled = gen::clusters(6, 6, 4, 0.5, rng);
    auto [t0, t1] = split_by_label(std::span<const LabeledExample>(labeled));
    ControlSet t{t0, t1, std::nullopt};
    Collection s = of(gen::vectors(25, 4, rng));
    const double base = divscore(s, t, CosinePlusOne{}).estimate;

    Collection perm = s;
    shuffle(perm.elements, rng);
    const double tol = 1e-12 * std::max(1.0, std::abs(base));
    EXPECT_NEAR(divscore(perm, t, CosinePlusOne{}).estimate, base, tol);

    ControlSet swapped{t1, t0, std::nullopt};
    EXPECT_NEAR(divscore(s, swapped, CosinePlusOne{}).estimate, -base, tol);

    Collection scaled;
    ControlSet tscaled;
    for (const auto& x : s.elements) scaled.elements.push_back(x.scaled(0.1 + 5 * rng.uniform01()));
    for (const auto& x : t0) tscaled.t0.push_back(x.scaled(0.1 + 5 * rng.uniform01()));
    for (const auto& x : t1) tscaled.t1.push_back(x.scaled(0.1 + 5 * rng.uniform01()));
    EXPECT_NEAR(divscore(scaled, tscaled, CosinePlusOne{}).estimate, base, 100 * tol);
  }
}

TEST(DivScoreTest, PointMassClustersAreExact) {
  const SyntheticModel model = make_angle_model(3, 90.0, 0.0, 5);
  Rng rng(1);
  const auto aux = sample_labeled(model, 4, 4, rng);
  auto [t0, t1] = split_by_label(std::span<const LabeledExample>(aux));
  const ControlSet t{t0, t1, std::nullopt};
  for (int i = 0; i <= 10; ++i) {
    const Collection s = generate_collection(model, 500, i / 10.0, rng);
    EXPECT_NEAR(divscore(s, t, CosinePlusOne{}).estimate,
                true_disparity(std::span<const Label>(*s.hidden_labels)), 1e-12);
  }
}

TEST(DivScoreTest, TwoGaussianCollectionWithinEnvelope) {
  const SyntheticModel model = make_angle_model(32, 90.0, 0.24, 3);
  Rng rng(77);
  const auto aux = sample_labeled(model, 25, 25, rng);
  auto [t0, t1] = split_by_label(std::span<const LabeledExample>(aux));
  const ControlSet t{t0, t1, std::nullopt};
  const Collection s = generate_collection(model, 500, 0.3, rng);
  ASSERT_DOUBLE_EQ(true_disparity(std::span<const Label>(*s.hidden_labels)), -0.4);
  DivScoreOptions opts;
  opts.with_bounds = true;
  const DisparityReport r = divscore(s, t, CosinePlusOne{}, opts);
  EXPECT_LE(std::abs(r.estimate + 0.4), r.diagnostics.at("additive_error"));
  EXPECT_LE(std::abs(r.estimate + 0.4), 0.15);
  EXPECT_GT(r.diagnostics.at("gamma_hat"), 0.0);
}

// ---------------------------------------------------------------------------

TEST(IncrementalUpdateTest, AddThenRemoveRestoresReport) {
  Rng rng(30);
  const auto labeled = gen::clusters(5, 5, 4, 0.5, rng);
  auto [t0, t1] = split_by_label(std::span<const LabeledExample>(labeled));
  const ControlSet t{t0, t1, std::nullopt};
  const Collection s = of(gen::vectors(40, 4, rng));
  const CosinePlusOne m;
  const DisparityReport r0 = divscore(s, t, m);
  const std::vector<FeatureVector> extra{gen::vector(4, rng)};
  const DisparityReport r1 = incremental_update(r0, extra, {}, s, t, m);
  const Collection s1 = apply_update(s, extra, {});
  const std::vector<std::size_t> last{s1.size() - 1};
  const DisparityReport r2 = incremental_update(r1, {}, last, s1, t, m);
  EXPECT_NEAR(r2.estimate, r0.estimate, 1e-12);
  EXPECT_NEAR(r2.raw_dhat, r0.raw_dhat, 1e-12);
}

TEST(IncrementalUpdateTest, RemoveAllButOneEqualsSingleton) {
  Rng rng(31);
  const auto labeled = gen::clusters(5, 5, 4, 0.5, rng);
  auto [t0, t1] = split_by_label(std::span<const LabeledExample>(labeled));
  const ControlSet t{t0, t1, std::nullopt};
  const Collection s = of(gen::vectors(12, 4, rng));
  const CosinePlusOne m;
  std::vector<std::size_t> drop;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != 7) drop.push_back(i);
  }
  const DisparityReport r = incremental_update(divscore(s, t, m), {}, drop, s, t, m);
  EXPECT_NEAR(r.estimate, divscore(of({s.elements[7]}), t, m).estimate, 1e-9);
}

TEST(IncrementalUpdateTest, AddTenEqualsRecompute) {
  Rng rng(32);
  const auto labeled = gen::clusters(5, 5, 4, 0.5, rng);
  auto [t0, t1] = split_by_label(std::span<const LabeledExample>(labeled));
  const ControlSet t{t0, t1, std::nullopt};
  const Collection s = of(gen::vectors(30, 4, rng));
  const CosinePlusOne m;
  const auto extra = gen::vectors(10, 4, rng);
  const DisparityReport r = incremental_update(divscore(s, t, m), extra, {}, s, t, m);
  EXPECT_NEAR(r.estimate, divscore(apply_update(s, extra, {}), t, m).estimate, 1e-9);
}

TEST(IncrementalUpdateTest, Errors) {
  const ControlSet t = two_plus_two();
  const Collection s = of({{1, 0}, {0, 1}});
  const CosinePlusOne m;
  const DisparityReport r = divscore(s, t, m);
  const std::vector<std::size_t> out_of_range{2};
  EXPECT_EQ(code_of([&] { incremental_update(r, {}, out_of_range, s, t, m); }),
            ErrorCode::kIndexOutOfRange);
  const std::vector<std::size_t> twice{0, 0};
  EXPECT_EQ(code_of([&] { incremental_update(r, {}, twice, s, t, m); }),
            ErrorCode::kInvalidParameter);
  const std::vector<std::size_t> all{0, 1};
  EXPECT_EQ(code_of([&] { incremental_update(r, {}, all, s, t, m); }), ErrorCode::kEmptySet);
  EXPECT_EQ(code_of([&] { incremental_update(DisparityReport{}, {}, {}, s, t, m); }),
            ErrorCode::kInvalidParameter);
}

// ---------------------------------------------------------------------------

BoundInputs inputs(std::size_t n, std::size_t t, double mu_diff, double gamma,
                   std::optional<double> delta = std::nullopt) {
  BoundInputs in;
  in.n = n;
  in.t = t;
  in.mu_diff = mu_diff;
  in.gamma = gamma;
  in.delta = delta;
  return in;
}

TEST(PerElementBoundTest, ClosedFormExample) {
  const ProbabilityBound p = lemma1_success_probability(inputs(500, 50, 1.0, 0.35, 0.5));
  const long double want =
      1.0L - 2.0L * std::exp(-25.0L / 12.0L) * (1.0L + std::exp(-0.25L * 0.35L * 50.0L / 6.0L));
  EXPECT_NEAR(p.raw, static_cast<double>(want), 1e-12);
  EXPECT_EQ(p.clamped, p.raw);
}

TEST(PerElementBoundTest, Limits) {
  const ProbabilityBound zero = lemma1_success_probability(inputs(10, 50, 1.0, 0.35, 0.0));
  EXPECT_DOUBLE_EQ(zero.raw, -3.0);
  EXPECT_EQ(zero.clamped, 0.0);
  const ProbabilityBound big = lemma1_success_probability(inputs(10, 50, 1.0, 0.35, 1e3));
  EXPECT_DOUBLE_EQ(big.raw, 1.0);
}

TEST(PerElementBoundTest, InvalidParameters) {
  EXPECT_EQ(code_of([] { lemma1_success_probability(inputs(10, 50, 0.0, 0.35, 0.5)); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { lemma1_success_probability(inputs(10, 50, 1.0, -0.1, 0.5)); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { lemma1_success_probability(inputs(10, 50, 1.0, 0.35, -0.5)); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { lemma1_success_probability(inputs(10, 50, 1.0, 0.35)); }),
            ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { lemma1_success_probability(inputs(10, 1, 1.0, 0.35, 0.5)); }),
            ErrorCode::kInvalidParameter);
}

TEST(PerElementBoundTest, MonotoneInEveryArgument) {
  const double base[] = {1.0, 0.35, 0.3};  // mu_diff, gamma, delta
  for (std::size_t t = 2; t < 200; t += 7) {
    EXPECT_LE(lemma1_success_probability(inputs(10, t, base[0], base[1], base[2])).raw,
              lemma1_success_probability(inputs(10, t + 7, base[0], base[1], base[2])).raw);
  }
  for (double x = 0.05; x < 2.0; x += 0.05) {
    EXPECT_LT(lemma1_success_probability(inputs(10, 50, x, 0.35, 0.3)).raw,
              lemma1_success_probability(inputs(10, 50, x + 0.05, 0.35, 0.3)).raw);
    EXPECT_LT(lemma1_success_probability(inputs(10, 50, 1.0, x, 0.3)).raw,
              lemma1_success_probability(inputs(10, 50, 1.0, x + 0.05, 0.3)).raw);
    EXPECT_LT(lemma1_success_probability(inputs(10, 50, 1.0, 0.35, x)).raw,
              lemma1_success_probability(inputs(10, 50, 1.0, 0.35, x + 0.05)).raw);
  }
}

TEST(CollectionBoundTest, ClosedFormExample) {
  const TheoremBound b = theorem_delta(inputs(500, 50, 1.0, 0.35));
  const long double want = std::sqrt(6.0L * std::log(10000.0L) / (50.0L * 0.35L));
  EXPECT_NEAR(b.delta, static_cast<double>(want), 1e-12);
  EXPECT_NEAR(b.success_probability, 0.9 - 1.0 / 100000.0, 1e-15);
  // mu_same defaults to mu_diff + gamma.
  EXPECT_NEAR(b.additive_error, b.delta * 2.35 / 0.35, 1e-12);
}

TEST(CollectionBoundTest, ScalingRelations) {
  const double d1 = theorem_delta(inputs(500, 50, 1.0, 0.2)).delta;
  const double d2 = theorem_delta(inputs(500, 50, 1.0, 0.4)).delta;
  EXPECT_NEAR(d2, d1 / std::numbers::sqrt2, 1e-12);
  // |T| proportional to log(20 |S|) keeps delta fixed.
  const double c = 10.0;
  for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
    const double t = c * std::log(20.0 * n);
    BoundInputs in = inputs(n, 2, 0.9, 0.3);
    // theorem_delta takes an integer |T|; compare against the continuous form.
    const double want = std::sqrt(6.0 / (c * 0.3));
    EXPECT_NEAR(std::sqrt(6.0 * std::log(20.0 * n) / (t * 0.3)), want, 1e-12);
    in.t = static_cast<std::size_t>(std::llround(t));
    EXPECT_NEAR(theorem_delta(in).delta, want, 0.05 * want);
  }
}

TEST(CollectionBoundTest, LogBaseKnob) {
  BoundInputs in = inputs(500, 50, 1.0, 0.35);
  const double natural = theorem_delta(in).delta;
  in.log_base = 10.0;
  EXPECT_NEAR(theorem_delta(in).delta, natural / std::sqrt(std::log(10.0)), 1e-12);
  in.log_base = 1.0;
  EXPECT_EQ(code_of([&] { theorem_delta(in); }), ErrorCode::kInvalidParameter);
}

TEST(CollectionBoundTest, Monotonicity) {
  for (std::size_t t = 2; t < 500; t += 13) {
    EXPECT_GT(theorem_delta(inputs(500, t, 1.0, 0.35)).delta,
              theorem_delta(inputs(500, t + 13, 1.0, 0.35)).delta);
  }
  for (std::size_t n = 1; n < 100000; n = n * 3 + 1) {
    EXPECT_LT(theorem_delta(inputs(n, 50, 1.0, 0.35)).delta,
              theorem_delta(inputs(n * 3 + 1, 50, 1.0, 0.35)).delta);
  }
  for (double g = 0.01; g < 1.5; g += 0.05) {
    EXPECT_GT(theorem_delta(inputs(500, 50, 2.0, g)).delta,
              theorem_delta(inputs(500, 50, 2.0, g + 0.05)).delta);
    EXPECT_GT(theorem_delta(inputs(500, 50, g, 2.0)).delta,
              theorem_delta(inputs(500, 50, g + 0.05, 2.0)).delta);
  }
}

TEST(CollectionBoundTest, InvalidParameters) {
  EXPECT_EQ(code_of([] { theorem_delta(inputs(0, 50, 1.0, 0.35)); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { theorem_delta(inputs(10, 50, 0.0, 0.35)); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(code_of([] { theorem_delta(inputs(10, 50, 1.0, 0.0)); }), ErrorCode::kInvalidParameter);
  BoundInputs in = inputs(10, 50, 1.0, 0.35);
  in.mu_same = 0.9;
  EXPECT_EQ(code_of([&] { theorem_delta(in); }), ErrorCode::kInvalidParameter);
}

}  // namespace
}  // namespace divaudit
