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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtl/error.hpp"
#include "vtl/metrics/metrics.hpp"
#include "vtl/viewselect/selector.hpp"

namespace vtl {

/// Property column order of the published comparison tables.
inline constexpr std::array<std::string_view, kNumProperties> kReportColumns{
    "fRS", "cDF", "tCO", "cYD", "aTK", "mTX", "cCM", "cDP", "cRX", "mRG", "mCO", "uRO", "tPR", "uCO", "fST"};

/// Field-wise arithmetic mean. An R^2 undefined in any input stays
/// undefined.
inline MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw InvalidArgument("mean_report: no reports");
  std::array<PropertyMetrics, kNumProperties> per{};
  const double n = static_cast<double>(reports.size());
  for (std::size_t p = 0; p < kNumProperties; ++p) {
    double r2 = 0.0, abs_err = 0.0, pct = 0.0;
    bool defined = true;
    for (const auto& r : reports) {
      defined = defined && r.properties[p].r_squared_defined;
      r2 += r.properties[p].r_squared;
      abs_err += r.properties[p].mae;
      pct += r.properties[p].median_pct_err;
    }
    per[p].r_squared_defined = defined;
    per[p].r_squared = defined ? r2 / n : std::numeric_limits<double>::quiet_NaN();
    per[p].mae = abs_err / n;
    per[p].median_pct_err = pct / n;
  }
  return aggregate_report(per, reports.front().num_samples);
}

struct SeedResult {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  std::vector<ViewSet> q_star;  ///< per network; multi-view modes only
  std::string checkpoint;
  std::vector<std::string> selection_logs;
};

/// Everything one `train` invocation produced.
struct ExperimentReport {
  nlohmann::json config;
  std::string config_hash;
  std::string data_hash;
  std::vector<SeedResult> seeds;
  MetricsReport mean;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> artifacts;

  std::string label() const {
    return config.value("mode", std::string("?")) + "/" + config.value("target", std::string("?"));
  }

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : seeds) {
      nlohmann::json e{{"seed", s.seed}, {"metrics", s.metrics.to_json()}, {"checkpoint", s.checkpoint}};
      if (!s.q_star.empty()) e["q_star"] = s.q_star;
      if (!s.selection_logs.empty()) e["selection_logs"] = s.selection_logs;
      per.push_back(std::move(e));
    }
    return {{"config", config},
            {"config_hash", config_hash},
            {"data_hash", data_hash},
            {"seeds", per},
            {"mean", mean.to_json()},
            {"wall_clock_seconds", wall_clock_seconds},
            {"artifacts", artifacts}};
  }

  static ExperimentReport from_json(const nlohmann::json& j) {
    ExperimentReport r;
    try {
      r.config = j.at("config");
      r.config_hash = j.at("config_hash").get<std::string>();
      r.data_hash = j.at("data_hash").get<std::string>();
      for (const auto& e : j.at("seeds")) {
        SeedResult s;
        s.seed = e.at("seed").get<std::uint64_t>();
        s.metrics = MetricsReport::from_json(e.at("metrics"));
        s.checkpoint = e.at("checkpoint").get<std::string>();
        if (e.contains("q_star")) s.q_star = e.at("q_star").get<std::vector<ViewSet>>();
        if (e.contains("selection_logs")) s.selection_logs = e.at("selection_logs").get<std::vector<std::string>>();
        r.seeds.push_back(std::move(s));
      }
      r.mean = MetricsReport::from_json(j.at("mean"));
      r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
      r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("experiment report: malformed JSON: ") + e.what());
    }
    return r;
  }

  static ExperimentReport load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read report '" + path.string() + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": invalid JSON: " + e.what());
    }
    return from_json(j);
  }
};

enum class TableKind { kRSquared, kPctErr };

inline constexpr std::size_t kTableMetricColumns = kNumProperties + 2;

/// 0 for no flag, 1 for best, 2 for second best.
using RankRow = std::array<int, kTableMetricColumns>;

struct ComparisonRow {
  std::string name;
  std::string config_hash;
  std::array<double, kTableMetricColumns> values{};
  RankRow rank{};
};

/// Per-property columns in table order followed by two aggregate columns:
/// mean R^2 and MAE, or %err and top-eight %err.
struct ComparisonTable {
  TableKind kind = TableKind::kRSquared;
  std::vector<ComparisonRow> rows;

  static std::array<std::string, kTableMetricColumns> columns(TableKind kind) {
    std::array<std::string, kTableMetricColumns> out;
    for (std::size_t i = 0; i < kNumProperties; ++i) out[i] = std::string(kReportColumns[i]);
    out[kNumProperties] = kind == TableKind::kRSquared ? "R2" : "pct_err";
    out[kNumProperties + 1] = kind == TableKind::kRSquared ? "MAE" : "pct_err_top8";
    return out;
  }

  /// Higher is better only for R^2 columns.
  static bool higher_is_better(TableKind kind, std::size_t column) {
    return kind == TableKind::kRSquared && column <= kNumProperties;
  }

  std::string to_csv() const {
    const auto cols = columns(kind);
    std::ostringstream os;
    os << std::setprecision(6) << "method,config_hash";
    for (const auto& c : cols) os << ',' << c;
    os << ",best,second\n";
    for (const auto& r : rows) {
      os << r.name << ',' << r.config_hash;
      for (double v : r.values) {
        os << ',';
        if (std::isnan(v)) os << "nan";
        else os << v;
      }
      for (int flag : {1, 2}) {
        os << ',';
        bool first = true;
        for (std::size_t c = 0; c < cols.size(); ++c)
          if (r.rank[c] == flag) {
            os << (first ? "" : ";") << cols[c];
            first = false;
          }
      }
      os << '\n';
    }
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json out{{"table", kind == TableKind::kRSquared ? "r_squared" : "pct_err"}, {"columns", columns(kind)}};
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json vals = nlohmann::json::array();
      for (double v : r.values) vals.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
      rs.push_back({{"method", r.name}, {"config_hash", r.config_hash}, {"values", vals}, {"rank", r.rank}});
    }
    out["rows"] = rs;
    return out;
  }
};

/// Marks best and second-best distinct values per column. Ties share a
/// flag; NaN is never flagged.
inline void flag_best(ComparisonTable& table) {
  for (std::size_t c = 0; c < kTableMetricColumns; ++c) {
    const bool higher = ComparisonTable::higher_is_better(table.kind, c);
    std::vector<double> distinct;
    for (const auto& r : table.rows)
      if (!std::isnan(r.values[c])) distinct.push_back(r.values[c]);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (higher) std::reverse(distinct.begin(), distinct.end());
    for (auto& r : table.rows) {
      r.rank[c] = 0;
      if (distinct.size() > 0 && r.values[c] == distinct[0]) r.rank[c] = 1;
      else if (distinct.size() > 1 && r.values[c] == distinct[1]) r.rank[c] = 2;
    }
  }
}

struct NamedReport {
  std::string name;
  std::string config_hash;
  MetricsReport metrics;
};

inline ComparisonTable build_table(std::span<const NamedReport> reports, TableKind kind) {
  ComparisonTable t;
  t.kind = kind;
  for (const auto& nr : reports) {
    ComparisonRow row;
    row.name = nr.name;
    row.config_hash = nr.config_hash;
    const auto& m = nr.metrics;
    for (std::size_t i = 0; i < kNumProperties; ++i) {
      const auto& pm = m.properties[*property_index(kReportColumns[i])];
      row.values[i] = kind == TableKind::kRSquared
                          ? (pm.r_squared_defined ? pm.r_squared : std::numeric_limits<double>::quiet_NaN())
                          : pm.median_pct_err;
    }
    row.values[kNumProperties] = kind == TableKind::kRSquared ? m.mean_r_squared : m.mean_pct_err;
    row.values[kNumProperties + 1] = kind == TableKind::kRSquared ? m.mean_mae : m.top8_pct_err;
    t.rows.push_back(std::move(row));
  }
  flag_best(t);
  return t;
}

}  // namespace vtl
