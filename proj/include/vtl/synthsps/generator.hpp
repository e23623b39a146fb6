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
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vtl/error.hpp"
#include "vtl/gradcore/random.hpp"
#include "vtl/synthsps/registry.hpp"

namespace vtl {

struct BetaShape {
  double alpha = 2.0;
  double beta = 2.0;
  double mean() const { return alpha / (alpha + beta); }
};

inline constexpr std::array<std::string_view, 15> kMaterialCategories{
    "plastic", "leather", "fabric", "wood",  "upholstery", "denim", "paper", "rubber",
    "foam",    "carpet",  "cork",   "vinyl", "stone",      "glass", "other"};

/// Generator settings. Beta shapes are loose stand-ins for the spread of the
/// measured property distributions; they are configuration, not contract.
struct GenConfig {
  std::size_t num_samples = 400;
  std::size_t views = 20;
  std::size_t height = 32;
  std::size_t width = 32;
  double sigma_meas = 2.0;
  double pixel_noise = 0.02;
  /// Weight of the shared per-category latent in each property draw.
  double group_correlation = 0.6;
  double theta0_min = 5.0;
  double theta0_max = 35.0;
  BetaShape group_shape{2.0, 2.0};
  std::array<BetaShape, kNumProperties> property_shapes{{
      {2.5, 2.5}, {2.5, 3.0}, {2.0, 3.0}, {2.0, 3.0}, {2.0, 2.0}, {2.0, 3.0}, {2.0, 3.0}, {3.0, 3.0},
      {3.0, 3.0}, {2.0, 3.5}, {2.0, 3.5}, {2.5, 3.0}, {2.0, 3.0}, {2.0, 4.0}, {1.5, 6.0},
  }};

  void validate() const {
    auto bad = [](const std::string& what) { throw InvalidArgument("gen config: " + what); };
    if (num_samples < 10) bad("num_samples must be >= 10");
    if (views < 2 || views > 1000) bad("views must lie in [2, 1000]");
    if (height < 8 || width < 8 || height > 1024 || width > 1024) bad("image size must lie in [8, 1024]");
    if (!(sigma_meas >= 0.0) || !std::isfinite(sigma_meas)) bad("sigma_meas must be >= 0");
    if (!(pixel_noise >= 0.0) || pixel_noise > 1.0) bad("pixel_noise must lie in [0, 1]");
    if (!(group_correlation >= 0.0 && group_correlation <= 1.0)) bad("group_correlation must lie in [0, 1]");
    if (!(theta0_min >= -45.0 && theta0_min <= theta0_max && theta0_max <= 45.0)) bad("theta0 range must lie in [-45, 45]");
    for (const auto& s : property_shapes)
      if (!(s.alpha > 0.0 && s.beta > 0.0)) bad("beta shapes must be positive");
    if (!(group_shape.alpha > 0.0 && group_shape.beta > 0.0)) bad("group beta shape must be positive");
  }

  nlohmann::json to_json() const {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& s : property_shapes) shapes.push_back({s.alpha, s.beta});
    return {{"num_samples", num_samples},
            {"views", views},
            {"height", height},
            {"width", width},
            {"sigma_meas", sigma_meas},
            {"pixel_noise", pixel_noise},
            {"group_correlation", group_correlation},
            {"theta0_min", theta0_min},
            {"theta0_max", theta0_max},
            {"group_shape", {group_shape.alpha, group_shape.beta}},
            {"property_shapes", shapes}};
  }

  static GenConfig from_json(const nlohmann::json& j) {
    GenConfig c;
    c.num_samples = j.at("num_samples").get<std::size_t>();
    c.views = j.at("views").get<std::size_t>();
    c.height = j.at("height").get<std::size_t>();
    c.width = j.at("width").get<std::size_t>();
    c.sigma_meas = j.at("sigma_meas").get<double>();
    c.pixel_noise = j.at("pixel_noise").get<double>();
    c.group_correlation = j.at("group_correlation").get<double>();
    c.theta0_min = j.at("theta0_min").get<double>();
    c.theta0_max = j.at("theta0_max").get<double>();
    c.group_shape = {j.at("group_shape")[0].get<double>(), j.at("group_shape")[1].get<double>()};
    const auto& shapes = j.at("property_shapes");
    if (shapes.size() != kNumProperties) throw DataError("gen config: expected 15 property shapes");
    for (std::size_t i = 0; i < kNumProperties; ++i)
      c.property_shapes[i] = {shapes[i][0].get<double>(), shapes[i][1].get<double>()};
    return c;
  }
};

/// 400 samples, 32x32, 20 views: the default experiment scale.
inline GenConfig desk_preset() { return GenConfig{}; }

/// Matches the captured sequences' shape (100 views), at 64x64.
inline GenConfig full_preset() {
  GenConfig c;
  c.views = 100;
  c.height = c.width = 64;
  return c;
}

/// Tiny dataset for smoke tests.
inline GenConfig smoke_preset() {
  GenConfig c;
  c.num_samples = 10;
  c.views = 6;
  c.height = c.width = 16;
  return c;
}

inline GenConfig preset_by_name(const std::string& name) {
  if (name == "desk") return desk_preset();
  if (name == "full") return full_preset();
  if (name == "smoke") return smoke_preset();
  throw InvalidArgument("unknown preset '" + name + "' (expected desk, full or smoke)");
}

/// Appearance controls derived from a tactile vector. Every field except
/// the nuisance terms (specular center, brightness offset, texture seed) is
/// a deterministic monotone function of the tactile values; aTK never
/// enters.
struct RenderParams {
  std::array<double, 3> base_rgb{};
  double macro_amplitude = 0.0;  ///< proportional to mTX
  double macro_period = 0.25;    ///< fraction of image width, increasing in mCO
  double macro_jitter = 0.0;     ///< phase irregularity, decreasing in mRG
  double micro_amplitude = 0.0;  ///< proportional to uRO
  double micro_frequency = 2.0;  ///< lattice cells per image width, increasing in uCO
  double specular_gain = 0.0;    ///< proportional to fST
  double specular_width = 10.0;  ///< degrees, decreasing in fRS
  double specular_center = 20.0; ///< degrees, nuisance
  double vignette = 0.0;         ///< increasing in mean compliance
  std::uint64_t texture_seed = 0;
};

struct MaterialSample {
  TactileVector tactile{};
  RenderParams render;
  std::size_t category = 0;
  std::uint64_t seed = 0;
};

/// H x W x 3 image, row-major, channels last.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * 3 + c]; }
};

inline double sample_beta(Rng& rng, const BetaShape& s) {
  const double x = std::gamma_distribution<double>(s.alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(s.beta, 1.0)(rng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

/// Properties sharing a latent factor; aTK is alone.
inline constexpr std::array<int, kNumProperties> kPropertyGroup{0, 0, 1, 1, 2, 2, 2, 3, 3, 4, 4, 4, 4, 4, -1};
inline constexpr int kNumPropertyGroups = 5;

inline double expected_property_mean(const GenConfig& cfg, std::size_t p) {
  const double own = cfg.property_shapes[p].mean();
  if (kPropertyGroup[p] < 0) return 100.0 * own;
  return 100.0 * (cfg.group_correlation * cfg.group_shape.mean() + (1.0 - cfg.group_correlation) * own);
}

inline double compliance_mean(const TactileVector& t) {
  return (t[prop::cCM] + t[prop::cDF] + t[prop::cDP] + t[prop::cRX] + t[prop::cYD]) / 5.0;
}

inline RenderParams derive_render_params(const TactileVector& t, std::uint64_t seed, const GenConfig& cfg) {
  Rng rng = make_rng(seed, {0x5e4d});
  RenderParams r;
  const double offset = (uniform01(rng) - 0.5) * 0.1;
  const double cool = t[prop::tCO] / 100.0;
  r.base_rgb = {0.15 + 0.4 * (1.0 - cool) + offset, 0.15 + 0.4 * t[prop::tPR] / 100.0 + offset,
                0.15 + 0.4 * cool + offset};
  r.macro_amplitude = 0.25 * t[prop::mTX] / 100.0;
  r.macro_period = 0.125 + 0.375 * t[prop::mCO] / 100.0;
  r.macro_jitter = 1.0 - t[prop::mRG] / 100.0;
  r.micro_amplitude = 0.15 * t[prop::uRO] / 100.0;
  r.micro_frequency = 2.0 + 14.0 * t[prop::uCO] / 100.0;
  r.specular_gain = 0.5 * t[prop::fST] / 100.0;
  r.specular_width = 4.0 + 16.0 * (1.0 - t[prop::fRS] / 100.0);
  r.specular_center = cfg.theta0_min + (cfg.theta0_max - cfg.theta0_min) * uniform01(rng);
  r.vignette = 0.5 * compliance_mean(t) / 100.0;
  r.texture_seed = rng();
  return r;
}

inline MaterialSample sample_material(Rng& rng, const GenConfig& cfg) {
  cfg.validate();
  MaterialSample m;
  std::array<double, kNumPropertyGroups> latent{};
  for (auto& g : latent) g = sample_beta(rng, cfg.group_shape);
  for (std::size_t p = 0; p < kNumProperties; ++p) {
    const double own = sample_beta(rng, cfg.property_shapes[p]);
    const int group = kPropertyGroup[p];
    const double x = group < 0 ? own
                               : cfg.group_correlation * latent[static_cast<std::size_t>(group)] +
                                     (1.0 - cfg.group_correlation) * own;
    m.tactile[p] = std::clamp(100.0 * x, 0.0, 100.0);
  }
  static constexpr std::array<double, 15> weights{0.22, 0.20, 0.14, 0.12, 0.06, 0.04, 0.03, 0.03,
                                                  0.03, 0.03, 0.02, 0.02, 0.02, 0.02, 0.02};
  m.category = std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng);
  m.seed = rng();
  m.render = derive_render_params(m.tactile, m.seed, cfg);
  return m;
}

/// View-dependent highlight strength s * exp(-(a - theta0)^2 / (2 sigma^2)).
inline double specular_response(const RenderParams& r, double angle_deg) {
  const double d = angle_deg - r.specular_center;
  return r.specular_gain * std::exp(-d * d / (2.0 * r.specular_width * r.specular_width));
}

/// Frame angle k of n, evenly spaced over [-45, 45].
inline double view_angle(std::size_t k, std::size_t n) {
  if (n < 2) return 0.0;
  return -45.0 + 90.0 * static_cast<double>(k) / static_cast<double>(n - 1);
}

namespace detail {

inline double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ULL +
                                             static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

/// Bilinear value noise in [-1, 1] with `freq` lattice cells per unit.
inline double value_noise(std::uint64_t seed, double u, double v, double freq) {
  const double x = u * freq, y = v * freq;
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  const double tx = x - fx, ty = y - fy;
  const double a = lattice_value(seed, ix, iy), b = lattice_value(seed, ix + 1, iy);
  const double c = lattice_value(seed, ix, iy + 1), d = lattice_value(seed, ix + 1, iy + 1);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

}  // namespace detail

/// Renders one view of a material. Pixel noise is seeded by the material
/// seed and the angle, so a (material, angle) pair always gives the same image.
inline Image render_view(const MaterialSample& m, double angle_deg, const GenConfig& cfg) {
  if (!(angle_deg >= -45.0 && angle_deg <= 45.0)) {
    throw InvalidArgument("render_view: angle " + std::to_string(angle_deg) + " outside [-45, 45]");
  }
  const RenderParams& r = m.render;
  Image img{cfg.height, cfg.width, std::vector<float>(cfg.height * cfg.width * 3)};
  Rng phase_rng = make_rng(r.texture_seed, {0x9a});
  std::vector<double> row_phase(cfg.height), col_phase(cfg.width);
  for (auto& p : row_phase) p = 2.0 * uniform01(phase_rng) - 1.0;
  for (auto& p : col_phase) p = 2.0 * uniform01(phase_rng) - 1.0;

  Rng noise_rng = make_rng(m.seed, {0x401, std::bit_cast<std::uint64_t>(angle_deg)});
  std::normal_distribution<double> noise(0.0, 1.0);
  const double gain = specular_response(r, angle_deg);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  for (std::size_t y = 0; y < cfg.height; ++y) {
    const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(cfg.height);
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(cfg.width);
      const double du = u - 0.5, dv = v - 0.5;
      const double r2 = (du * du + dv * dv) / 0.5;
      const double shade = 1.0 - r.vignette * r2;
      const double bump = 0.5 + 0.5 * std::cos(two_pi * u / r.macro_period + r.macro_jitter * std::numbers::pi * row_phase[y]) *
                                     std::cos(two_pi * v / r.macro_period + r.macro_jitter * std::numbers::pi * col_phase[x]);
      const double macro = r.macro_amplitude * bump;
      const double micro = r.micro_amplitude * detail::value_noise(r.texture_seed, u, v, r.micro_frequency);
      const double highlight = std::exp(-(du * du + dv * dv) / (2.0 * 0.3 * 0.3));
      for (std::size_t c = 0; c < 3; ++c) {
        double value = r.base_rgb[c] * shade + macro + micro + gain * highlight;
        if (cfg.pixel_noise > 0.0) value += cfg.pixel_noise * noise(noise_rng);
        img.pixels[(y * cfg.width + x) * 3 + c] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return img;
}

/// Five noisy repeats of the ground-truth vector, clipped to [0, 100].
inline std::array<double, kNumRepeats * kNumProperties> measure_tactile(const MaterialSample& m, Rng& rng,
                                                                       double sigma_meas) {
  if (!(sigma_meas >= 0.0)) throw InvalidArgument("measure_tactile: sigma_meas must be >= 0");
  std::array<double, kNumRepeats * kNumProperties> out{};
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t r = 0; r < kNumRepeats; ++r)
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      const double v = sigma_meas > 0.0 ? m.tactile[p] + sigma_meas * noise(rng) : m.tactile[p];
      out[r * kNumProperties + p] = std::clamp(v, 0.0, 100.0);
    }
  return out;
}

/// Angular band where the material-averaged normalized highlight response
/// is at least half its peak. Averaged over specular centers and the
/// configured fRS distribution by quadrature; deterministic.
inline std::pair<double, double> informative_band(const GenConfig& cfg) {
  Rng rng(0xba4d);
  std::vector<double> widths;
  for (int i = 0; i < 400; ++i) {
    TactileVector t{};
    t[prop::fRS] = 100.0 * (cfg.group_correlation * sample_beta(rng, cfg.group_shape) +
                            (1.0 - cfg.group_correlation) * sample_beta(rng, cfg.property_shapes[prop::fRS]));
    widths.push_back(4.0 + 16.0 * (1.0 - t[prop::fRS] / 100.0));
  }
  constexpr int kCenters = 61;
  auto response = [&](double a) {
    double s = 0.0;
    for (int k = 0; k < kCenters; ++k) {
      const double c = cfg.theta0_min + (cfg.theta0_max - cfg.theta0_min) * k / (kCenters - 1.0);
      for (double w : widths) s += std::exp(-(a - c) * (a - c) / (2.0 * w * w));
    }
    return s;
  };
  std::vector<double> grid;
  double peak = 0.0;
  for (int i = 0; i <= 900; ++i) {
    grid.push_back(response(-45.0 + 0.1 * i));
    peak = std::max(peak, grid.back());
  }
  double lo = 45.0, hi = -45.0;
  for (int i = 0; i <= 900; ++i) {
    if (grid[static_cast<std::size_t>(i)] >= 0.5 * peak) {
      lo = std::min(lo, -45.0 + 0.1 * i);
      hi = std::max(hi, -45.0 + 0.1 * i);
    }
  }
  return {lo, hi};
}

}  // namespace vtl
