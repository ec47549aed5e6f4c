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

// JSON/CSV serialization for reports, sweep configs and sweep results.

#ifndef DIVAUDIT_REPORT_IO_HPP_
#define DIVAUDIT_REPORT_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"

#include "divaudit/divscore.hpp"
#include "divaudit/errors.hpp"
#include "divaudit/harness.hpp"
#include "divaudit/io.hpp"
#include "divaudit/random.hpp"
#include "divaudit/synthgen.hpp"

namespace divaudit {

using Json = nlohmann::ordered_json;

inline Json report_to_json(const DisparityReport& r) {
  Json j;
  j["method"] = std::string(method_name(r.method));
  j["estimate"] = r.estimate;
  j["raw_dhat"] = r.raw_dhat;
  if (r.norm_stats) {
    j["norm_stats"] = {{"l", r.norm_stats->l}, {"u0", r.norm_stats->u0}, {"u1", r.norm_stats->u1}};
  } else {
    j["norm_stats"] = nullptr;
  }
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j;
}

// Two-column key,value listing of the same fields.
inline void write_report_csv(std::ostream& out, const DisparityReport& r) {
  out << "key,value\n";
  out << "method," << method_name(r.method) << '\n';
  out << "estimate," << fmt::format("{}", r.estimate) << '\n';
  out << "raw_dhat," << fmt::format("{}", r.raw_dhat) << '\n';
  if (r.norm_stats) {
    out << "l," << fmt::format("{}", r.norm_stats->l) << '\n';
    out << "u0," << fmt::format("{}", r.norm_stats->u0) << '\n';
    out << "u1," << fmt::format("{}", r.norm_stats->u1) << '\n';
  }
  for (const auto& [k, v] : r.diagnostics) out << k << ',' << fmt::format("{}", v) << '\n';
}

// ---------------------------------------------------------------------------
// Sweep configuration
//
// {
//   "data": {"synthetic": {"dim": 64, "angle": 90, "sigma": 0.2}}
//        or {"synthetic": {"dim": 64, "angle": 90, "target_gamma": 0.35,
//                          "calibration_samples": 400, "calibration_seed": 7}}
//        or {"file": "pool.csv", "delimiter": ","},
//   "aux_size": 200, "eval_pool_size": 0, "collection_size": 500,
//   "f_values": [0, 0.1, ...], "methods": ["divscore-random-balanced", ...],
//   "control_size": 50, "control_sizes": [10, 20, 50],
//   "alpha": 1.0, "k": 5, "repetitions": 100, "seed": 1,
//   "metric": "cosine1", "clip": false, "eps_norm": 1e-6, "diagnostics": true
// }
//
// "control_sizes" switches to a control-size sweep at the single f value.

struct LoadedConfig {
  ExperimentConfig cfg;
  std::vector<std::size_t> control_sizes;
  Json raw;
  Json resolved;  // derived quantities, e.g. a calibrated sigma
};

inline LoadedConfig parse_experiment_config(const Json& j,
                                            const std::filesystem::path& base_dir = {}) {
  LoadedConfig out;
  out.raw = j;
  out.resolved = Json::object();
  ExperimentConfig& cfg = out.cfg;
  try {
    if (!j.contains("data")) throw AuditError(ErrorCode::kParseError, "config needs \"data\"");
    const Json& data = j.at("data");
    if (data.contains("synthetic")) {
      const Json& syn = data.at("synthetic");
      const std::size_t dim = syn.value("dim", std::size_t{64});
      const double angle = syn.value("angle", 90.0);
      SyntheticModel model = make_angle_model(dim, angle, syn.value("sigma", 0.0));
      if (syn.contains("target_gamma")) {
        model.sigma = calibrate_sigma(model, syn.at("target_gamma").get<double>(),
                                      syn.value("calibration_samples", std::size_t{400}),
                                      syn.value("calibration_seed", std::uint64_t{7}));
      }
      out.resolved["sigma"] = model.sigma;
      cfg.data = std::move(model);
    } else if (data.contains("file")) {
      std::filesystem::path path = data.at("file").get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      const std::string delim = data.value("delimiter", std::string(","));
      if (delim.size() != 1) throw AuditError(ErrorCode::kParseError, "delimiter must be one character");
      cfg.data = read_feature_file(path.string(), delim[0]).labeled();
      out.resolved["file"] = path.string();
    } else {
      throw AuditError(ErrorCode::kParseError, "data needs \"synthetic\" or \"file\"");
    }
    cfg.aux_size = j.value("aux_size", cfg.aux_size);
    cfg.eval_pool_size = j.value("eval_pool_size", cfg.eval_pool_size);
    cfg.collection_size = j.value("collection_size", cfg.collection_size);
    if (j.contains("f_values")) cfg.f_values = j.at("f_values").get<std::vector<double>>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_sweep_method(m.get<std::string>()));
    }
    cfg.control_size = j.value("control_size", cfg.control_size);
    if (j.contains("control_sizes")) {
      out.control_sizes = j.at("control_sizes").get<std::vector<std::size_t>>();
    }
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.k = j.value("k", cfg.k);
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.metric = j.value("metric", cfg.metric);
    cfg.divscore.clip = j.value("clip", false);
    cfg.divscore.eps_norm = j.value("eps_norm", cfg.divscore.eps_norm);
    cfg.diagnostics = j.value("diagnostics", true);
  } catch (const nlohmann::json::exception& e) {
    throw AuditError(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  cfg.validate();
  return out;
}

inline LoadedConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AuditError(ErrorCode::kParseError, "cannot open " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw AuditError(ErrorCode::kParseError, path + ": " + e.what());
  }
  return parse_experiment_config(j, std::filesystem::path(path).parent_path());
}

inline SweepResult run_loaded(const LoadedConfig& loaded) {
  if (loaded.control_sizes.empty()) return run_sweep(loaded.cfg);
  return control_size_sweep(loaded.cfg, std::span<const std::size_t>(loaded.control_sizes));
}

// ---------------------------------------------------------------------------
// Sweep output

// One row per (f, control_size, method, statistic). Wall times are excluded
// so that equal configs give byte-identical files.
inline void write_results_csv(std::ostream& out, const SweepResult& result) {
  out << "f,control_size,method,statistic,value,repetitions\n";
  for (const auto& c : result.cells) {
    auto row = [&](std::string_view stat, double value) {
      out << fmt::format("{},{},{},{},{},{}\n", c.f, c.control_size, sweep_method_name(c.method),
                         stat, value, c.repetitions);
    };
    row("mean_estimate", c.mean_estimate);
    row("std_error", c.std_error);
    row("std_dev", c.std_dev);
    row("mean_abs_error", c.mean_abs_error);
    row("true_disparity", c.true_disparity);
    row("gamma_hat", c.gamma_hat);
    row("gamma_control", c.gamma_control);
    row("ok_count", static_cast<double>(c.ok_count));
    for (const auto& [tag, count] : c.failures) {
      row("failed:" + tag, static_cast<double>(count));
    }
  }
}

inline Json manifest_json(const LoadedConfig& loaded, const SweepResult& result) {
  Json m;
  m["config"] = loaded.raw;
  m["resolved"] = loaded.resolved;
  m["rng"] = Rng::kAlgorithm;
  m["seed_scheme"] =
      "repetition r uses derive_seed(seed, stream, r) = splitmix64 chain; streams: "
      "aux=1, balanced control=0x200000+m, collection=0x3000000000000000^bits(f), "
      "proportional control=0x4000000000000000^bits(f)";
  m["repetition_seeds"] = result.repetition_seeds;
  m["warnings"] = result.warnings;
  Json cells = Json::array();
  for (const auto& c : result.cells) {
    Json failures = Json::object();
    for (const auto& [tag, count] : c.failures) failures[tag] = count;
    cells.push_back({{"f", c.f},
                     {"control_size", c.control_size},
                     {"method", std::string(sweep_method_name(c.method))},
                     {"repetitions", c.repetitions},
                     {"ok_count", c.ok_count},
                     {"single_repetition", c.single_repetition},
                     {"mean_wall_ms", c.mean_wall_ms},
                     {"failures", failures}});
  }
  m["cells"] = cells;
  return m;
}

inline void write_sweep_outputs(const std::filesystem::path& out_dir, const LoadedConfig& loaded,
                                const SweepResult& result) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "results.csv");
    if (!csv) throw AuditError(ErrorCode::kParseError, "cannot write results.csv");
    write_results_csv(csv, result);
  }
  std::ofstream man(out_dir / "manifest.json");
  if (!man) throw AuditError(ErrorCode::kParseError, "cannot write manifest.json");
  man << manifest_json(loaded, result).dump(2) << '\n';
}

}  // namespace divaudit

#endif  // DIVAUDIT_REPORT_IO_HPP_
