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

// divaudit: audit, build-control, synth, sweep and bounds subcommands.

#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <string>

#include "CLI11.hpp"

#include "divaudit.hpp"

namespace {

using namespace divaudit;

char delimiter_of(const std::string& s) {
  if (s.size() != 1) throw AuditError(ErrorCode::kInvalidParameter, "delimiter must be one character");
  return s[0];
}

struct AuditArgs {
  std::string collection;
  std::string control;
  std::string metric = CosinePlusOne::kName;
  std::string method = "divscore";
  std::string out = "json";
  std::string delimiter = ",";
  std::size_t k = kDefaultSelfTrainingBatch;
  double eps_norm = 1e-6;
  double log_base = std::numbers::e;
  bool clip = false;
  bool bounds = false;
};

int run_audit(const AuditArgs& a) {
  if (a.metric != CosinePlusOne::kName) {
    throw AuditError(ErrorCode::kInvalidParameter, "unsupported metric '" + a.metric + "'");
  }
  const char delim = delimiter_of(a.delimiter);
  const Collection s = read_feature_file(a.collection, delim).to_collection();
  const FeatureTable control_table = read_feature_file(a.control, delim);
  const ControlSet t = control_table.to_control_set();
  const CosinePlusOne metric;

  DivScoreOptions opts;
  opts.clip = a.clip;
  opts.eps_norm = a.eps_norm;
  opts.with_bounds = a.bounds;
  opts.log_base = a.log_base;

  DisparityReport report;
  if (a.method == "divscore") {
    report = divscore(s, t, metric, opts);
  } else if (a.method == "iid") {
    report = iid_measure(t);
  } else if (a.method == "ss-st") {
    report = ss_st(s, t, metric, a.k);
    report.diagnostics["k"] = static_cast<double>(a.k);
  } else {
    throw AuditError(ErrorCode::kInvalidParameter, "unknown method '" + a.method + "'");
  }
  if (a.bounds && a.method != "divscore") {
    const auto labeled = control_table.labeled();
    const GammaEstimate g = estimate_gamma(std::span<const LabeledExample>(labeled), metric);
    report.diagnostics["gamma_hat"] = g.gamma;
    report.diagnostics["mu_same_hat"] = g.mu_same;
    report.diagnostics["mu_diff_hat"] = g.mu_diff;
    if (g.gamma > 0.0 && g.mu_diff > 0.0 && !s.empty()) {
      BoundInputs in{s.size(), t.size(), g.mu_diff, g.gamma, std::nullopt, g.mu_same, a.log_base};
      const TheoremBound b = theorem_delta(in);
      report.diagnostics["delta"] = b.delta;
      report.diagnostics["additive_error"] = b.additive_error;
      report.diagnostics["success_probability"] = b.success_probability;
    }
  }
  if (a.out == "json") {
    std::cout << report_to_json(report).dump(2) << '\n';
  } else if (a.out == "csv") {
    write_report_csv(std::cout, report);
  } else {
    throw AuditError(ErrorCode::kInvalidParameter, "--out must be json or csv");
  }
  return 0;
}

struct BuildArgs {
  std::string aux;
  std::string out;
  std::string mode = "adaptive";
  std::string delimiter = ",";
  std::size_t size = 50;
  double alpha = kImageAlpha;
  std::uint64_t seed = 0;
};

int run_build_control(const BuildArgs& a) {
  const char delim = delimiter_of(a.delimiter);
  const auto labeled = read_feature_file(a.aux, delim).labeled();
  ControlSet t;
  if (a.mode == "adaptive") {
    t = build_adaptive_control(AuxiliarySet::from_labeled(labeled),
                               AdaptiveConfig{a.size, a.alpha, TieBreak::kLowestIndex},
                               CosinePlusOne{});
  } else if (a.mode == "random-balanced") {
    t = sample_control(labeled, SamplerConfig{a.size, SamplerMode::kBalanced, a.seed});
  } else if (a.mode == "random-proportional") {
    t = sample_control(labeled, SamplerConfig{a.size, SamplerMode::kProportional, a.seed});
  } else {
    throw AuditError(ErrorCode::kInvalidParameter, "unknown mode '" + a.mode + "'");
  }
  write_feature_file(a.out, table_from_control(t), delim);
  std::cerr << "wrote " << t.t0.size() << " + " << t.t1.size() << " control elements to "
            << a.out << '\n';
  return 0;
}

struct SynthArgs {
  std::size_t dim = 64;
  double angle = 90.0;
  double sigma = 0.2;
  std::optional<double> target_gamma;
  std::size_t n = 500;
  double f = 0.5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  SyntheticModel model = make_angle_model(a.dim, a.angle, a.sigma, a.seed);
  if (a.target_gamma) {
    model.sigma = calibrate_sigma(model, *a.target_gamma, 400, 7);
    std::cerr << "calibrated sigma = " << fmt::format("{}", model.sigma) << '\n';
  }
  const Collection s = generate_collection(model, a.n, a.f);
  write_feature_file(a.out, table_from_labeled(to_labeled(s)));
  return 0;
}

int run_sweep_cmd(const std::string& config, const std::string& out_dir) {
  const LoadedConfig loaded = load_experiment_config(config);
  const SweepResult result = run_loaded(loaded);
  write_sweep_outputs(out_dir, loaded, result);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "wrote " << result.cells.size() << " cells to " << out_dir << '\n';
  return 0;
}

struct BoundsArgs {
  std::size_t n = 0;
  std::size_t t = 0;
  double mu_diff = 0.0;
  double gamma = 0.0;
  std::optional<double> mu_same;
  std::optional<double> delta;
  double log_base = std::numbers::e;
};

int run_bounds(const BoundsArgs& a) {
  BoundInputs in{a.n, a.t, a.mu_diff, a.gamma, a.delta, a.mu_same, a.log_base};
  const TheoremBound th = theorem_delta(in);
  in.delta = a.delta.value_or(th.delta);
  const ProbabilityBound lemma = lemma1_success_probability(in);
  Json j;
  j["theorem"] = {{"delta", th.delta},
                  {"raw_error", th.raw_error},
                  {"additive_error", th.additive_error},
                  {"success_probability", th.success_probability}};
  j["lemma"] = {{"delta", *in.delta},
                {"success_probability", lemma.clamped},
                {"success_probability_raw", lemma.raw}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate the protected-attribute disparity of an unlabeled collection"};
  app.require_subcommand(1);

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Estimate the disparity of a collection");
  audit_cmd->add_option("--collection", audit.collection, "Feature file to audit")->required();
  audit_cmd->add_option("--control", audit.control, "Labeled control-set feature file")->required();
  audit_cmd->add_option("--metric", audit.metric, "Similarity metric")->check(CLI::IsMember({"cosine1"}));
  audit_cmd->add_option("--method", audit.method, "Estimator")
      ->check(CLI::IsMember({"divscore", "iid", "ss-st"}));
  audit_cmd->add_option("--k", audit.k, "Self-training batch size")->check(CLI::PositiveNumber);
  audit_cmd->add_option("--out", audit.out, "Output format")->check(CLI::IsMember({"json", "csv"}));
  audit_cmd->add_option("--delimiter", audit.delimiter, "Feature file delimiter");
  audit_cmd->add_option("--eps-norm", audit.eps_norm, "Minimum |u_i - l|");
  audit_cmd->add_option("--log-base", audit.log_base, "Logarithm base in the error bound");
  audit_cmd->add_flag("--clip", audit.clip, "Clip the estimate to [-1, 1]");
  audit_cmd->add_flag("--bounds", audit.bounds, "Report the error bound and its probability");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build-control", "Construct a control set");
  build_cmd->add_option("--aux", build.aux, "Labeled auxiliary feature file")->required();
  build_cmd->add_option("--size", build.size, "Control set size m")->required();
  build_cmd->add_option("--alpha", build.alpha, "Redundancy weight");
  build_cmd->add_option("--mode", build.mode, "Construction")
      ->check(CLI::IsMember({"adaptive", "random-balanced", "random-proportional"}));
  build_cmd->add_option("--seed", build.seed, "Seed for the random modes");
  build_cmd->add_option("--delimiter", build.delimiter, "Feature file delimiter");
  build_cmd->add_option("--out", build.out, "Output feature file")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labeled collection");
  synth_cmd->add_option("--dim", synth.dim, "Dimension");
  synth_cmd->add_option("--angle", synth.angle, "Angle between the centers, degrees");
  synth_cmd->add_option("--sigma", synth.sigma, "Isotropic noise");
  synth_cmd->add_option("--target-gamma", synth.target_gamma, "Calibrate sigma to this gamma");
  synth_cmd->add_option("--n", synth.n, "Collection size");
  synth_cmd->add_option("--f", synth.f, "Fraction of group 0")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--seed", synth.seed, "Seed");
  synth_cmd->add_option("--out", synth.out, "Output feature file")->required();

  std::string sweep_config;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a seeded experiment sweep");
  sweep_cmd->add_option("--config", sweep_config, "JSON config")->required();
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory")->required();

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the concentration bounds");
  bounds_cmd->add_option("--n", bounds.n, "|S|")->required();
  bounds_cmd->add_option("--t", bounds.t, "|T|")->required();
  bounds_cmd->add_option("--mu-diff", bounds.mu_diff, "Mean cross-group similarity")->required();
  bounds_cmd->add_option("--gamma", bounds.gamma, "mu_same - mu_diff")->required();
  bounds_cmd->add_option("--mu-same", bounds.mu_same, "Mean within-group similarity");
  bounds_cmd->add_option("--delta", bounds.delta, "delta for the per-element bound");
  bounds_cmd->add_option("--log-base", bounds.log_base, "Logarithm base");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*audit_cmd) return run_audit(audit);
    if (*build_cmd) return run_build_control(build);
    if (*synth_cmd) return run_synth(synth);
    if (*sweep_cmd) return run_sweep_cmd(sweep_config, sweep_out);
    if (*bounds_cmd) return run_bounds(bounds);
  } catch (const AuditError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
