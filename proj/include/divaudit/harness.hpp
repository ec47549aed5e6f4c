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

// Repeated, seeded evaluation of the estimators.
//
// One repetition draws an auxiliary labeled pool (and, for file sources, an
// evaluation pool), builds the per-repetition control sets, and then for
// every cell (f, control size) draws a collection with round(f n) group-0
// members and runs each configured method on it. Cells aggregate over
// repetitions; a failing method is recorded with its error tag and the
// sweep moves on.
//
// Seeds. Every random stream is a pure function of the master seed, a
// stream id and the repetition index (see derive_seed), so appending
// repetitions or sweep values never changes earlier draws:
//   split/aux pool        stream kAuxStream
//   random balanced T     stream kControlStream + m
//   collection at f       stream kCollectionStream ^ bits(f)
//   proportional T at f   stream kProportionalStream ^ bits(f), counter mixed with m

#ifndef DIVAUDIT_HARNESS_HPP_
#define DIVAUDIT_HARNESS_HPP_

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "divaudit/adaptive.hpp"
#include "divaudit/baselines.hpp"
#include "divaudit/core.hpp"
#include "divaudit/divscore.hpp"
#include "divaudit/errors.hpp"
#include "divaudit/random.hpp"
#include "divaudit/synthgen.hpp"

namespace divaudit {

enum class SweepMethod {
  kDivScoreRandomBalanced,
  kDivScoreRandomProportional,
  kDivScoreAdaptive,
  kIidMeasure,
  kSsSt,
};

constexpr std::string_view sweep_method_name(SweepMethod m) {
  switch (m) {
    case SweepMethod::kDivScoreRandomBalanced: return "divscore-random-balanced";
    case SweepMethod::kDivScoreRandomProportional: return "divscore-random-proportional";
    case SweepMethod::kDivScoreAdaptive: return "divscore-adaptive";
    case SweepMethod::kIidMeasure: return "iid";
    case SweepMethod::kSsSt: return "ss-st";
  }
  return "unknown";
}

inline SweepMethod parse_sweep_method(std::string_view name) {
  for (SweepMethod m : {SweepMethod::kDivScoreRandomBalanced,
                        SweepMethod::kDivScoreRandomProportional, SweepMethod::kDivScoreAdaptive,
                        SweepMethod::kIidMeasure, SweepMethod::kSsSt}) {
    if (sweep_method_name(m) == name) return m;
  }
  throw AuditError(ErrorCode::kInvalidParameter, "unknown method '" + std::string(name) + "'");
}

inline std::vector<double> default_f_grid() {
  std::vector<double> out;
  for (int i = 0; i <= 10; ++i) out.push_back(i / 10.0);
  return out;
}

struct ExperimentConfig {
  // Synthetic model, or a fully labeled pool read from a feature file.
  std::variant<SyntheticModel, std::vector<LabeledExample>> data;
  std::size_t aux_size = 200;
  std::size_t eval_pool_size = 0;  // file sources; 0 means everything after the aux split
  std::vector<double> f_values = default_f_grid();
  std::size_t collection_size = 500;
  std::vector<SweepMethod> methods = {SweepMethod::kDivScoreRandomBalanced};
  std::size_t control_size = 50;
  double alpha = kImageAlpha;
  std::size_t k = kDefaultSelfTrainingBatch;
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
  std::string metric = CosinePlusOne::kName;
  DivScoreOptions divscore;
  bool diagnostics = true;  // per-cell gamma_hat and gamma^(T)

  bool synthetic() const { return std::holds_alternative<SyntheticModel>(data); }

  void validate() const {
    if (repetitions < 1) throw AuditError(ErrorCode::kInvalidParameter, "repetitions must be >= 1");
    if (f_values.empty()) throw AuditError(ErrorCode::kInvalidParameter, "empty f sweep");
    for (double f : f_values) {
      if (!(f >= 0.0 && f <= 1.0)) {
        throw AuditError(ErrorCode::kInvalidParameter, "sweep values must lie in [0, 1]");
      }
    }
    if (collection_size < 1) throw AuditError(ErrorCode::kInvalidParameter, "collection_size must be >= 1");
    if (methods.empty()) throw AuditError(ErrorCode::kInvalidParameter, "no methods configured");
    if (aux_size < 4) throw AuditError(ErrorCode::kInvalidParameter, "aux_size must be >= 4");
    if (k < 1) throw AuditError(ErrorCode::kInvalidParameter, "k must be >= 1");
    if (metric != CosinePlusOne::kName) {
      throw AuditError(ErrorCode::kInvalidParameter, "unsupported metric '" + metric + "'");
    }
    if (const auto* pool = std::get_if<std::vector<LabeledExample>>(&data)) {
      if (aux_size + collection_size > pool->size()) {
        throw AuditError(ErrorCode::kInsufficientExamples,
                         "aux_size + collection_size exceeds the labeled pool");
      }
      if (eval_pool_size != 0 && aux_size + eval_pool_size > pool->size()) {
        throw AuditError(ErrorCode::kInsufficientExamples,
                         "aux_size + eval_pool_size exceeds the labeled pool");
      }
    } else {
      std::get<SyntheticModel>(data).validate();
    }
  }
};

struct CellSample {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double truth = std::numeric_limits<double>::quiet_NaN();
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double gamma_control = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::optional<ErrorCode> error;

  bool ok() const { return !error.has_value(); }
};

struct SweepCell {
  double f = 0.0;
  std::size_t control_size = 0;
  SweepMethod method = SweepMethod::kDivScoreRandomBalanced;
  std::vector<CellSample> samples;  // one per repetition, in repetition order

  std::size_t repetitions = 0;
  std::size_t ok_count = 0;
  double mean_estimate = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double mean_abs_error = std::numeric_limits<double>::quiet_NaN();
  double true_disparity = std::numeric_limits<double>::quiet_NaN();
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  double gamma_control = std::numeric_limits<double>::quiet_NaN();
  double mean_wall_ms = 0.0;
  bool single_repetition = false;  // std_error forced to 0
  std::map<std::string, std::size_t> failures;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<std::uint64_t> repetition_seeds;
  std::vector<std::string> warnings;

  const SweepCell* find(double f, std::size_t control_size, SweepMethod method) const {
    for (const auto& c : cells) {
      if (c.f == f && c.control_size == control_size && c.method == method) return &c;
    }
    return nullptr;
  }
};

inline constexpr std::uint64_t kAuxStream = 1;
inline constexpr std::uint64_t kControlStream = 0x200000;
inline constexpr std::uint64_t kCollectionStream = 0x3000000000000000ULL;
inline constexpr std::uint64_t kProportionalStream = 0x4000000000000000ULL;

inline std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep) {
  return derive_seed(master, kAuxStream, rep);
}

namespace detail {

// Mean of values after sorting, so the result does not depend on the order
// in which repetitions finished.
inline double order_free_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace detail

inline void aggregate(SweepCell& cell) {
  cell.repetitions = cell.samples.size();
  std::vector<double> est;
  std::vector<double> abs_err;
  std::vector<double> truth;
  std::vector<double> gh;
  std::vector<double> gc;
  std::vector<double> wall;
  cell.failures.clear();
  for (const auto& s : cell.samples) {
    wall.push_back(s.wall_ms);
    if (!std::isnan(s.truth)) truth.push_back(s.truth);
    if (!std::isnan(s.gamma_hat)) gh.push_back(s.gamma_hat);
    if (!s.ok()) {
      ++cell.failures[std::string(error_code_name(*s.error))];
      continue;
    }
    est.push_back(s.estimate);
    abs_err.push_back(std::abs(s.estimate - s.truth));
    if (!std::isnan(s.gamma_control)) gc.push_back(s.gamma_control);
  }
  cell.ok_count = est.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  cell.true_disparity = truth.empty() ? nan : detail::order_free_mean(truth);
  cell.gamma_hat = gh.empty() ? nan : detail::order_free_mean(gh);
  cell.gamma_control = gc.empty() ? nan : detail::order_free_mean(gc);
  cell.mean_wall_ms = wall.empty() ? 0.0 : detail::order_free_mean(wall);
  cell.single_repetition = cell.ok_count == 1;
  if (est.empty()) {
    cell.mean_estimate = cell.std_dev = cell.std_error = cell.mean_abs_error = nan;
    return;
  }
  cell.mean_estimate = detail::order_free_mean(est);
  cell.mean_abs_error = detail::order_free_mean(abs_err);
  if (est.size() == 1) {
    cell.std_dev = 0.0;
    cell.std_error = 0.0;
    return;
  }
  std::vector<double> sq;
  sq.reserve(est.size());
  for (double v : est) sq.push_back((v - cell.mean_estimate) * (v - cell.mean_estimate));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double v : sq) ss += v;
  const double n = static_cast<double>(est.size());
  cell.std_dev = std::sqrt(ss / (n - 1.0));
  cell.std_error = cell.std_dev / std::sqrt(n);
}

namespace detail {

struct RepetitionPools {
  std::vector<LabeledExample> aux;
  std::vector<LabeledExample> eval;  // file sources only
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
};

template <SimilarityMetric Metric>
RepetitionPools draw_pools(const ExperimentConfig& cfg, std::size_t rep, const Metric& metric) {
  RepetitionPools pools;
  Rng rng(repetition_seed(cfg.seed, rep));
  if (const auto* model = std::get_if<SyntheticModel>(&cfg.data)) {
    const std::size_t half = cfg.aux_size / 2;
    pools.aux = sample_labeled(*model, half, cfg.aux_size - half, rng);
  } else {
    std::vector<LabeledExample> all = std::get<std::vector<LabeledExample>>(cfg.data);
    shuffle(all, rng);
    pools.aux.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cfg.aux_size));
    const std::size_t eval_end =
        cfg.eval_pool_size == 0 ? all.size() : cfg.aux_size + cfg.eval_pool_size;
    pools.eval.assign(all.begin() + static_cast<std::ptrdiff_t>(cfg.aux_size),
                      all.begin() + static_cast<std::ptrdiff_t>(eval_end));
  }
  if (cfg.diagnostics) {
    try {
      pools.gamma_hat = estimate_gamma(std::span<const LabeledExample>(pools.aux), metric).gamma;
    } catch (const AuditError&) {
      // Left as NaN; the methods themselves report the failure.
    }
  }
  return pools;
}

inline std::vector<LabeledExample> draw_collection(const ExperimentConfig& cfg,
                                                   const RepetitionPools& pools, double f,
                                                   std::size_t rep) {
  Rng rng(derive_seed(cfg.seed, kCollectionStream ^ std::bit_cast<std::uint64_t>(f), rep));
  const std::size_t n = cfg.collection_size;
  const std::size_t n0 = group0_count(n, f);
  if (const auto* model = std::get_if<SyntheticModel>(&cfg.data)) {
    return sample_labeled(*model, n0, n - n0, rng);
  }
  std::vector<std::size_t> idx[2];
  for (std::size_t i = 0; i < pools.eval.size(); ++i) idx[to_int(pools.eval[i].z)].push_back(i);
  const std::size_t want[2] = {n0, n - n0};
  if (idx[0].size() < want[0] || idx[1].size() < want[1]) {
    throw AuditError(ErrorCode::kInsufficientClassExamples,
                     "evaluation pool cannot supply the requested group sizes");
  }
  std::vector<LabeledExample> out;
  out.reserve(n);
  for (int z = 0; z < 2; ++z) {
    for (std::size_t j : sample_indices(idx[z].size(), want[z], rng)) {
      out.push_back(pools.eval[idx[z][j]]);
    }
  }
  shuffle(out, rng);
  return out;
}

template <typename Fn>
CellSample timed(Fn&& fn) {
  CellSample s;
  const auto start = std::chrono::steady_clock::now();
  try {
    fn(s);
  } catch (const AuditError& e) {
    s.error = e.code();
    s.estimate = std::numeric_limits<double>::quiet_NaN();
  }
  const auto stop = std::chrono::steady_clock::now();
  s.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return s;
}

// Control sets for one (repetition, m); built lazily since not every
// method needs each.
template <SimilarityMetric Metric>
struct ControlCache {
  const ExperimentConfig& cfg;
  const RepetitionPools& pools;
  std::size_t rep;
  std::size_t m;
  const Metric& metric;
  std::optional<ControlSet> balanced;
  std::optional<ControlSet> adaptive;
  std::optional<AuditError> balanced_error;
  std::optional<AuditError> adaptive_error;

  const ControlSet& get_balanced() {
    if (balanced_error) throw *balanced_error;
    if (!balanced) {
      try {
        Rng rng(derive_seed(cfg.seed, kControlStream + m, rep));
        SamplerConfig sc{m, SamplerMode::kBalanced, 0};
        balanced = with_norm_stats(
            sample_random_balanced(std::span<const LabeledExample>(pools.aux), sc, rng), metric);
      } catch (const AuditError& e) {
        balanced_error = e;
        throw;
      }
    }
    return *balanced;
  }

  const ControlSet& get_adaptive() {
    if (adaptive_error) throw *adaptive_error;
    if (!adaptive) {
      try {
        const auto aux = AuxiliarySet::from_labeled(pools.aux);
        adaptive = with_norm_stats(
            build_adaptive_control(aux, AdaptiveConfig{m, cfg.alpha, TieBreak::kLowestIndex}, metric),
            metric);
      } catch (const AuditError& e) {
        adaptive_error = e;
        throw;
      }
    }
    return *adaptive;
  }
};

template <SimilarityMetric Metric>
void run_cell_methods(const ExperimentConfig& cfg, const RepetitionPools& pools,
                      ControlCache<Metric>& controls, double f, std::size_t rep,
                      const Metric& metric, std::vector<CellSample>& out) {
  std::vector<LabeledExample> labeled;
  std::optional<ErrorCode> draw_error;
  try {
    labeled = draw_collection(cfg, pools, f, rep);
  } catch (const AuditError& e) {
    draw_error = e.code();
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Collection s;
  double truth = nan;
  if (!draw_error) {
    s = to_collection(labeled);
    truth = true_disparity(std::span<const Label>(*s.hidden_labels));
  }
  const std::span<const LabeledExample> holdout(labeled);

  std::optional<ControlSet> proportional;
  auto get_proportional = [&]() -> const ControlSet& {
    if (!proportional) {
      Rng rng(derive_seed(cfg.seed, kProportionalStream ^ std::bit_cast<std::uint64_t>(f),
                          mix64(rep) ^ controls.m));
      SamplerConfig sc{controls.m, SamplerMode::kProportional, 0};
      proportional = sample_random_proportional(holdout, sc, rng);
    }
    return *proportional;
  };

  for (SweepMethod method : cfg.methods) {
    const ControlSet* used = nullptr;
    CellSample sample = timed([&](CellSample& cs) {
      if (draw_error) throw AuditError(*draw_error, "collection draw failed");
      switch (method) {
        case SweepMethod::kDivScoreRandomBalanced:
          used = &controls.get_balanced();
          cs.estimate = divscore(s, *used, metric, cfg.divscore).estimate;
          break;
        case SweepMethod::kDivScoreAdaptive:
          used = &controls.get_adaptive();
          cs.estimate = divscore(s, *used, metric, cfg.divscore).estimate;
          break;
        case SweepMethod::kDivScoreRandomProportional:
          cs.estimate = divscore(s, get_proportional(), metric, cfg.divscore).estimate;
          break;
        case SweepMethod::kIidMeasure:
          cs.estimate = iid_measure(get_proportional()).estimate;
          break;
        case SweepMethod::kSsSt:
          cs.estimate = ss_st(s, controls.get_balanced(), metric, cfg.k).estimate;
          break;
      }
    });
    // gamma^(T) needs both labels in the collection, so it is undefined at
    // f = 0 and f = 1.
    if (cfg.diagnostics && sample.ok() && used != nullptr) {
      try {
        sample.gamma_control = gamma_of_control(*used, holdout, metric);
      } catch (const AuditError&) {
      }
    }
    sample.truth = truth;
    sample.gamma_hat = pools.gamma_hat;
    out.push_back(sample);
  }
}

// Runs every (f, m) pair for every repetition; cells ordered by
// (f, m, method) in configuration order.
template <SimilarityMetric Metric>
SweepResult run_grid(const ExperimentConfig& cfg, std::span<const double> f_values,
                     std::span<const std::size_t> sizes, const Metric& metric) {
  cfg.validate();
  SweepResult result;
  for (double f : f_values) {
    for (std::size_t m : sizes) {
      for (SweepMethod method : cfg.methods) {
        SweepCell cell;
        cell.f = f;
        cell.control_size = m;
        cell.method = method;
        cell.samples.reserve(cfg.repetitions);
        result.cells.push_back(std::move(cell));
      }
    }
  }
  const std::size_t nm = cfg.methods.size();
  std::vector<CellSample> batch;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    result.repetition_seeds.push_back(repetition_seed(cfg.seed, rep));
    const RepetitionPools pools = draw_pools(cfg, rep, metric);
    for (std::size_t si = 0; si < sizes.size(); ++si) {
      ControlCache<Metric> controls{cfg, pools, rep, sizes[si], metric, {}, {}, {}, {}};
      for (std::size_t fi = 0; fi < f_values.size(); ++fi) {
        batch.clear();
        run_cell_methods(cfg, pools, controls, f_values[fi], rep, metric, batch);
        const std::size_t base = (fi * sizes.size() + si) * nm;
        for (std::size_t j = 0; j < nm; ++j) result.cells[base + j].samples.push_back(batch[j]);
      }
    }
  }
  for (auto& cell : result.cells) {
    aggregate(cell);
    if (cell.single_repetition) {
      result.warnings.push_back("single repetition: standard error reported as 0 for f=" +
                                std::to_string(cell.f) + " method=" +
                                std::string(sweep_method_name(cell.method)));
    }
  }
  return result;
}

}  // namespace detail

template <SimilarityMetric Metric = CosinePlusOne>
SweepResult run_sweep(const ExperimentConfig& cfg, const Metric& metric = {}) {
  const std::size_t sizes[] = {cfg.control_size};
  return detail::run_grid(cfg, std::span<const double>(cfg.f_values),
                          std::span<const std::size_t>(sizes), metric);
}

// Fixed f (the single entry of cfg.f_values), varying control size.
template <SimilarityMetric Metric = CosinePlusOne>
SweepResult control_size_sweep(const ExperimentConfig& cfg, std::span<const std::size_t> sizes,
                               const Metric& metric = {}) {
  if (cfg.f_values.size() != 1) {
    throw AuditError(ErrorCode::kInvalidParameter,
                     "control_size_sweep needs exactly one f value");
  }
  if (sizes.empty()) throw AuditError(ErrorCode::kInvalidParameter, "no control sizes given");
  return detail::run_grid(cfg, std::span<const double>(cfg.f_values), sizes, metric);
}

}  // namespace divaudit

#endif  // DIVAUDIT_HARNESS_HPP_
