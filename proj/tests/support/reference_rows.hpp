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
#include <string_view>

#include "vtl/metrics/metrics.hpp"

namespace vtl::testing {

/// Column order of the single-image result tables.
inline constexpr std::array<std::string_view, 15> kTableColumns{"fRS", "cDF", "tCO", "cYD", "aTK",
                                                                "mTX", "cCM", "cDP", "cRX", "mRG",
                                                                "mCO", "uRO", "tPR", "uCO", "fST"};

// Single-image R^2 rows.
inline constexpr std::array<double, 15> kRegressionR2{0.07, 0.49, 0.50, 0.44, -0.46, 0.43, 0.13, 0.35,
                                                      0.11, 0.46, 0.56, 0.32, 0.57, 0.57, 0.53};
inline constexpr std::array<double, 15> kCrossModalR2{0.54, 0.52, 0.62, 0.64, -0.07, 0.43, 0.47, 0.67,
                                                      0.44, 0.47, 0.54, 0.44, 0.65, 0.59, 0.59};
inline constexpr double kRegressionMeanR2 = 0.34, kCrossModalMeanR2 = 0.50;

// Single-image median percentage error rows.
inline constexpr std::array<double, 15> kRegressionPctErr{18.6, 16.6, 18.2, 22.5, 12.7, 28.8, 21.6, 21.9,
                                                          34.0, 50.0, 60.4, 65.5, 65.1, 70.4, 80.6};
inline constexpr std::array<double, 15> kCrossModalPctErr{13.0, 15.0, 15.9, 17.2, 17.3, 17.7, 18.9, 23.4,
                                                          29.3, 39.3, 49.0, 57.4, 63.3, 72.0, 73.5};
inline constexpr double kRegressionMeanPctErr = 39.1, kCrossModalMeanPctErr = 34.8;
inline constexpr double kRegressionTop8 = 20.1, kCrossModalTop8 = 17.3;

inline MetricsReport report_from_table(const std::array<double, 15>& r2, const std::array<double, 15>& pct) {
  const TactileVector r2_reg = to_registry_order(kTableColumns, r2);
  const TactileVector pct_reg = to_registry_order(kTableColumns, pct);
  return report_from_rows(&r2_reg, nullptr, &pct_reg);
}

}  // namespace vtl::testing
