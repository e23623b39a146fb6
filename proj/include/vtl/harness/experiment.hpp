// Copyright 2026 The vtl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtl/crossmodal/data.hpp"
#include "vtl/crossmodal/train.hpp"
#include "vtl/harness/config.hpp"
#include "vtl/harness/report.hpp"
#include "vtl/synthsps/dataset.hpp"
#include "vtl/viewselect/train.hpp"

namespace vtl {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

/// Prepends a comment line so CSV artifacts carry the config hash. Readers
/// skip lines starting with '#'.
inline std::string csv_with_hash(const std::string& config_hash, const std::string& csv) {
  return "# config_hash: " + config_hash + "\n" + csv;
}

/// New directory `<root>/<label>-<UTC timestamp>`; a numeric suffix keeps
/// reruns within the same second apart. Existing runs are never touched.
inline std::filesystem::path make_run_directory(const std::filesystem::path& root, const std::string& label) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw DataError("cannot create output directory '" + root.string() + "': " + ec.message());
  const std::string base = label + "-" + stamp;
  for (int suffix = 0; suffix < 10000; ++suffix) {
    const auto dir = root / (suffix == 0 ? base : base + "-" + std::to_string(suffix));
    if (std::filesystem::create_directory(dir, ec)) return dir;
    if (ec) throw DataError("cannot create run directory '" + dir.string() + "': " + ec.message());
  }
  throw DataError("too many runs named '" + base + "' under '" + root.string() + "'");
}

/// Opens the configured dataset directory, or generates a preset in memory.
inline Dataset open_dataset(const ExperimentConfig& cfg) {
  constexpr std::string_view prefix = "preset:";
  if (cfg.dataset.empty()) throw UsageError("no dataset given");
  if (cfg.dataset.starts_with(prefix)) {
    GenConfig g;
    try {
      g = preset_by_name(cfg.dataset.substr(prefix.size()));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return generate_in_memory(g, cfg.data_seed);
  }
  return Dataset::open(cfg.dataset);
}

struct SplitData {
  std::string data_hash;
  ImageSet train_nadir, val_nadir;
  MultiViewSet train_all, val_all;
};

inline SplitData load_split(const Dataset& ds, bool multiview) {
  SplitData d;
  d.data_hash = ds.manifest().config_hash();
  if (multiview) {
    d.train_all = load_all_views(ds, ds.train_ids());
    d.val_all = load_all_views(ds, ds.val_ids());
  } else {
    d.train_nadir = load_nadir_images(ds, ds.train_ids());
    d.val_nadir = load_nadir_images(ds, ds.val_ids());
  }
  return d;
}

/// Trains and evaluates every seed, writing checkpoints, logs and the
/// report into a fresh run directory under `cfg.output`.
inline ExperimentReport run_train(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = open_dataset(cfg);
  const SplitData data = load_split(ds, cfg.multiview());
  const std::string hash = cfg.hash();
  const auto dir = make_run_directory(cfg.output, cfg.mode);

  ExperimentReport report;
  report.config = cfg.to_json();
  report.config_hash = hash;
  report.data_hash = data.data_hash;
  std::vector<MetricsReport> per_seed;
  for (std::uint64_t seed : cfg.seeds) {
    if (progress) *progress << "[" << cfg.mode << "] seed " << seed << '\n';
    SeedResult sr;
    sr.seed = seed;
    const std::string tag = "seed" + std::to_string(seed);
    Checkpoint ckpt;
    if (cfg.multiview()) {
      MultiViewTrainResult res = train_multiview(data.train_all, cfg.multiview_config(seed));
      res.model.data_hash = data.data_hash;
      sr.metrics = res.model.evaluate(data.val_all);
      sr.q_star = res.model.selections;
      for (std::size_t i = 0; i < res.selection.size(); ++i) {
        const auto path = dir / ("selection_" + tag + "_net" + std::to_string(i) + ".csv");
        write_text(path, csv_with_hash(hash, res.selection[i].log.to_csv()));
        sr.selection_logs.push_back(path.string());
      }
      ckpt = res.model.to_checkpoint();
    } else {
      const CrossModalConfig c = cfg.crossmodal_config(seed);
      TrainResult res = cfg.mode == "regression" ? train_regression_baseline(data.train_nadir, c)
                                                 : train_cross_modal(data.train_nadir, c);
      res.model.data_hash = data.data_hash;
      sr.metrics = res.model.evaluate(data.val_nadir);
      const auto log_path = dir / ("train_log_" + tag + ".csv");
      write_text(log_path, csv_with_hash(hash, res.log.to_csv()));
      report.artifacts.push_back(log_path.string());
      ckpt = res.model.to_checkpoint();
    }
    ckpt.put_string("meta/config_hash", hash);
    const auto ckpt_path = dir / (tag + ".ckpt");
    ckpt.save(ckpt_path);
    sr.checkpoint = ckpt_path.string();
    report.artifacts.push_back(ckpt_path.string());
    for (const auto& p : sr.selection_logs) report.artifacts.push_back(p);
    const auto metrics_path = dir / ("metrics_" + tag + ".csv");
    write_text(metrics_path, csv_with_hash(hash, sr.metrics.to_csv()));
    report.artifacts.push_back(metrics_path.string());
    per_seed.push_back(sr.metrics);
    report.seeds.push_back(std::move(sr));
    if (progress) *progress << "  val mean R2 " << report.seeds.back().metrics.mean_r_squared << '\n';
  }
  report.mean = mean_report(per_seed);
  const auto mean_path = dir / "metrics_mean.csv";
  write_text(mean_path, csv_with_hash(hash, report.mean.to_csv()));
  report.artifacts.push_back(mean_path.string());
  const auto report_path = dir / "report.json";
  report.artifacts.push_back(report_path.string());
  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(report_path, report.to_json().dump(2) + "\n");
  return report;
}

struct EvalResult {
  std::string kind;
  std::string config_hash;
  MetricsReport metrics;

  nlohmann::json to_json() const {
    return {{"kind", kind}, {"config_hash", config_hash}, {"metrics", metrics.to_json()}};
  }
};

/// Loads a checkpoint and evaluates it on the dataset's validation split.
inline EvalResult run_eval(const std::filesystem::path& checkpoint, const Dataset& ds) {
  const Checkpoint c = Checkpoint::load(checkpoint);
  std::string dataset_order;
  for (const auto& a : ds.manifest().property_acronyms) dataset_order += (dataset_order.empty() ? "" : ",") + a;
  if (c.get_string("meta/property_acronyms") != dataset_order) {
    throw DataError("checkpoint property order '" + c.get_string("meta/property_acronyms") +
                    "' differs from the dataset's '" + dataset_order + "'");
  }
  EvalResult out;
  out.kind = c.get_string("meta/kind");
  out.config_hash = c.has("meta/config_hash") ? c.get_string("meta/config_hash") : "";
  if (out.kind == "multiview") {
    MultiViewModel m = MultiViewModel::from_checkpoint(c);
    if (ds.manifest().views != m.views || ds.manifest().height != m.config.encoder.height ||
        ds.manifest().width != m.config.encoder.width) {
      throw DataError("checkpoint expects " + std::to_string(m.views) + " views of " +
                      std::to_string(m.config.encoder.height) + "x" + std::to_string(m.config.encoder.width) +
                      ", dataset has " + std::to_string(ds.manifest().views) + " views of " +
                      std::to_string(ds.manifest().height) + "x" + std::to_string(ds.manifest().width));
    }
    out.metrics = m.evaluate(load_all_views(ds, ds.val_ids()));
  } else {
    TactileEstimator e = TactileEstimator::from_checkpoint(c);
    e.check_geometry(ds.manifest().height, ds.manifest().width);
    out.metrics = e.evaluate(load_nadir_images(ds, ds.val_ids()));
  }
  return out;
}

/// Per-seed selections from stages one and two only.
struct SelectionReport {
  nlohmann::json config;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<ViewSet>> q_star;  ///< [seed][network]
  std::vector<std::string> selection_logs;

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t i = 0; i < seeds.size(); ++i) per.push_back({{"seed", seeds[i]}, {"q_star", q_star[i]}});
    return {{"config", config}, {"config_hash", config_hash}, {"seeds", per}, {"selection_logs", selection_logs}};
  }
};

inline SelectionReport run_select_views(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  const auto method = parse_multiview_method(cfg.mode);
  if (!method || !uses_selector(*method)) throw UsageError("select-views needs mode nvs or vbnvs, got '" + cfg.mode + "'");
  const Dataset ds = open_dataset(cfg);
  const MultiViewSet train = load_all_views(ds, ds.train_ids());
  const std::string hash = cfg.hash();
  const auto dir = make_run_directory(cfg.output, "select-" + cfg.mode);
  SelectionReport report;
  report.config = cfg.to_json();
  report.config_hash = hash;
  for (std::uint64_t seed : cfg.seeds) {
    if (progress) *progress << "[select-views " << cfg.mode << "] seed " << seed << '\n';
    const MultiViewConfig mc = cfg.multiview_config(seed);
    const auto targets = mc.targets();
    std::vector<ViewSet> qs;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const SelectionResult r = run_selection(train, mc, targets[i], i);
      const auto path = dir / ("selection_seed" + std::to_string(seed) + "_net" + std::to_string(i) + ".csv");
      write_text(path, csv_with_hash(hash, r.log.to_csv()));
      report.selection_logs.push_back(path.string());
      qs.push_back(r.q_star);
    }
    report.seeds.push_back(seed);
    report.q_star.push_back(std::move(qs));
  }
  write_text(dir / "selection.json", report.to_json().dump(2) + "\n");
  return report;
}

/// Writes R^2 and %err comparison tables (CSV and JSON) for the given
/// experiment reports into `out_dir`.
inline std::pair<ComparisonTable, ComparisonTable> run_report(std::span<const NamedReport> reports,
                                                              const std::filesystem::path& out_dir) {
  if (reports.empty()) throw UsageError("report needs at least one experiment report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create '" + out_dir.string() + "': " + ec.message());
  ComparisonTable r2 = build_table(reports, TableKind::kRSquared);
  ComparisonTable pct = build_table(reports, TableKind::kPctErr);
  write_text(out_dir / "r_squared.csv", r2.to_csv());
  write_text(out_dir / "r_squared.json", r2.to_json().dump(2) + "\n");
  write_text(out_dir / "pct_err.csv", pct.to_csv());
  write_text(out_dir / "pct_err.json", pct.to_json().dump(2) + "\n");
  return {std::move(r2), std::move(pct)};
}

}  // namespace vtl
