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

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vtl/error.hpp"
#include "vtl/synthsps/registry.hpp"

namespace vtl {

inline constexpr double kPctErrEpsilon = 1.0;

/// Properties whose median percentage errors make up the top-eight score.
inline constexpr std::array<std::string_view, 8> kTop8Properties{"fRS", "cDF", "tCO", "cYD",
                                                                 "aTK", "mTX", "cCM", "cDP"};

namespace detail {
inline void check_pair(std::span<const double> truth, std::span<const double> pred, std::string_view op) {
  if (truth.size() != pred.size()) {
    throw ShapeError(std::string(op) + ": truth has " + std::to_string(truth.size()) + " entries, pred has " +
                     std::to_string(pred.size()));
  }
  if (truth.empty()) throw InvalidArgument(std::string(op) + ": no samples");
}
}  // namespace detail

/// 1 - SS_res / SS_tot with SS_tot taken around `train_mean`. Returns NaN
/// when SS_tot is zero.
inline double r_squared(std::span<const double> truth, std::span<const double> pred, double train_mean) {
  detail::check_pair(truth, pred, "r_squared");
  if (truth.empty()) throw InvalidArgument("r_squared: needs at least 1 sample");
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    tot += (truth[i] - train_mean) * (truth[i] - train_mean);
  }
  if (tot == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - res / tot;
}

inline double mae(std::span<const double> truth, std::span<const double> pred) {
  detail::check_pair(truth, pred, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - pred[i]);
  return s / static_cast<double>(truth.size());
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median: empty input");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Median of 100 |pred - truth| / max(truth, epsilon).
inline double median_pct_err(std::span<const double> truth, std::span<const double> pred,
                             double epsilon = kPctErrEpsilon) {
  detail::check_pair(truth, pred, "median_pct_err");
  if (!(epsilon > 0.0)) throw InvalidArgument("median_pct_err: epsilon must be positive");
  std::vector<double> errs(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    errs[i] = 100.0 * std::abs(pred[i] - truth[i]) / std::max(truth[i], epsilon);
  return median(std::move(errs));
}

/// Mean of the eight top-eight entries; `per_property` is in registry order.
inline double top8_pct_err(std::span<const double> per_property) {
  if (per_property.size() != kNumProperties) {
    throw InvalidArgument("top8_pct_err: expected 15 per-property values, got " + std::to_string(per_property.size()));
  }
  double s = 0.0;
  for (auto name : kTop8Properties) s += per_property[*property_index(name)];
  return s / static_cast<double>(kTop8Properties.size());
}

/// Reorders values given under `columns` (any permutation of the registry
/// acronyms) into registry order.
inline TactileVector to_registry_order(std::span<const std::string_view> columns, std::span<const double> values) {
  if (columns.size() != kNumProperties || values.size() != kNumProperties) {
    throw InvalidArgument("to_registry_order: expected 15 columns and 15 values");
  }
  TactileVector out{};
  std::array<bool, kNumProperties> seen{};
  for (std::size_t i = 0; i < kNumProperties; ++i) {
    const auto idx = property_index(columns[i]);
    if (!idx) throw InvalidArgument("to_registry_order: unknown property '" + std::string(columns[i]) + "'");
    if (seen[*idx]) throw InvalidArgument("to_registry_order: duplicate property '" + std::string(columns[i]) + "'");
    seen[*idx] = true;
    out[*idx] = values[i];
  }
  return out;
}

struct PropertyMetrics {
  double r_squared = 0.0;
  double mae = 0.0;
  double median_pct_err = 0.0;
  bool r_squared_defined = true;
};

struct MetricsReport {
  std::array<PropertyMetrics, kNumProperties> properties{};
  double mean_r_squared = 0.0;
  double mean_mae = 0.0;
  double mean_pct_err = 0.0;
  double top8_pct_err = 0.0;
  std::size_t num_samples = 0;

  nlohmann::json to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      const auto& m = properties[p];
      per.push_back({{"property", kPropertyRegistry[p].acronym},
                     {"r_squared", m.r_squared_defined ? nlohmann::json(m.r_squared) : nlohmann::json(nullptr)},
                     {"r_squared_defined", m.r_squared_defined},
                     {"mae", m.mae},
                     {"median_pct_err", m.median_pct_err}});
    }
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"properties", per},
            {"mean_r_squared", num(mean_r_squared)},
            {"mean_mae", mean_mae},
            {"mean_pct_err", mean_pct_err},
            {"top8_pct_err", top8_pct_err},
            {"num_samples", num_samples}};
  }

  static MetricsReport from_json(const nlohmann::json& j);

  /// One row per property, header included.
  std::string to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "property,r_squared,mae,median_pct_err\n";
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      const auto& m = properties[p];
      os << kPropertyRegistry[p].acronym << ',';
      if (m.r_squared_defined) os << m.r_squared;
      else os << "nan";
      os << ',' << m.mae << ',' << m.median_pct_err << '\n';
    }
    return os.str();
  }
};

/// Fills the aggregate fields from the per-property entries.
inline MetricsReport aggregate_report(const std::array<PropertyMetrics, kNumProperties>& per_property,
                                      std::size_t num_samples = 0) {
  MetricsReport r;
  r.properties = per_property;
  r.num_samples = num_samples;
  double r2 = 0.0, abs_err = 0.0, pct = 0.0;
  std::array<double, kNumProperties> pcts{};
  for (std::size_t p = 0; p < kNumProperties; ++p) {
    r2 += per_property[p].r_squared_defined ? per_property[p].r_squared : std::numeric_limits<double>::quiet_NaN();
    abs_err += per_property[p].mae;
    pct += per_property[p].median_pct_err;
    pcts[p] = per_property[p].median_pct_err;
  }
  constexpr double n = kNumProperties;
  r.mean_r_squared = r2 / n;
  r.mean_mae = abs_err / n;
  r.mean_pct_err = pct / n;
  r.top8_pct_err = top8_pct_err(pcts);
  return r;
}

/// Builds a report from per-property value rows (e.g. transcribed table rows).
/// Missing metrics are left at zero.
inline MetricsReport report_from_rows(const TactileVector* r2, const TactileVector* mae_row, const TactileVector* pct) {
  std::array<PropertyMetrics, kNumProperties> per{};
  for (std::size_t p = 0; p < kNumProperties; ++p) {
    if (r2) per[p].r_squared = (*r2)[p];
    if (mae_row) per[p].mae = (*mae_row)[p];
    if (pct) per[p].median_pct_err = (*pct)[p];
  }
  return aggregate_report(per);
}

/// Metrics over `truth` and `pred`, each num_samples x 15 in raw units.
inline MetricsReport evaluate(std::span<const TactileVector> truth, std::span<const TactileVector> pred,
                              const TactileVector& train_mean) {
  if (truth.size() != pred.size()) throw ShapeError("evaluate: truth and pred sample counts differ");
  if (truth.empty()) throw InvalidArgument("evaluate: needs at least 1 sample");
  std::array<PropertyMetrics, kNumProperties> per{};
  std::vector<double> t(truth.size()), y(truth.size());
  for (std::size_t p = 0; p < kNumProperties; ++p) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      t[i] = truth[i][p];
      y[i] = pred[i][p];
    }
    per[p].r_squared = r_squared(t, y, train_mean[p]);
    per[p].r_squared_defined = !std::isnan(per[p].r_squared);
    per[p].mae = mae(t, y);
    per[p].median_pct_err = median_pct_err(t, y);
  }
  return aggregate_report(per, truth.size());
}

inline MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  std::array<PropertyMetrics, kNumProperties> per{};
  try {
    const auto& arr = j.at("properties");
    if (arr.size() != kNumProperties) throw DataError("report: expected 15 property entries");
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      const auto& e = arr[p];
      if (e.at("property").get<std::string>() != kPropertyRegistry[p].acronym) {
        throw DataError("report: property order differs from registry");
      }
      per[p].r_squared_defined = e.at("r_squared_defined").get<bool>();
      per[p].r_squared = per[p].r_squared_defined ? e.at("r_squared").get<double>()
                                                  : std::numeric_limits<double>::quiet_NaN();
      per[p].mae = e.at("mae").get<double>();
      per[p].median_pct_err = e.at("median_pct_err").get<double>();
    }
    return aggregate_report(per, j.at("num_samples").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed JSON: ") + e.what());
  }
}

}  // namespace vtl
