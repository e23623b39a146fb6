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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "vtl/common/binary_io.hpp"
#include "vtl/error.hpp"
#include "vtl/synthsps/generator.hpp"
#include "vtl/synthsps/registry.hpp"

namespace vtl {

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr std::string_view kSampleMagic = "VTP1";

enum class Split { kTrain, kVal };

/// One material: N views plus the 5x15 measurement matrix.
struct VisuoTactilePair {
  std::size_t id = 0;
  std::size_t views = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> images;  ///< N x H x W x 3
  std::vector<float> angles;  ///< N, degrees
  std::array<float, kNumRepeats * kNumProperties> measurements{};
  Split split = Split::kTrain;

  std::span<const float> view(std::size_t k) const {
    const std::size_t n = height * width * 3;
    return std::span<const float>(images).subspan(k * n, n);
  }

  /// Mean over the five repeats; the regression target.
  TactileVector target() const {
    TactileVector t{};
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      double s = 0.0;
      for (std::size_t r = 0; r < kNumRepeats; ++r) s += measurements[r * kNumProperties + p];
      t[p] = s / static_cast<double>(kNumRepeats);
    }
    return t;
  }
};

/// Index of the frame closest to 0 degrees; ties go to the lowest index.
inline std::size_t nadir_index(std::span<const float> angles) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < angles.size(); ++k)
    if (std::abs(angles[k]) < std::abs(angles[best]) - 1e-4f) best = k;
  return best;
}

/// 90/10 split sizes: val = max(1, floor(n / 10)).
inline std::pair<std::size_t, std::size_t> split_counts(std::size_t n) {
  const std::size_t val = std::max<std::size_t>(1, n / 10);
  return {n - val, val};
}

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  std::size_t num_samples = 0;
  std::size_t views = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::string> property_acronyms;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::uint64_t seed = 0;
  nlohmann::json gen_config = nlohmann::json::object();
  std::vector<std::string> categories;

  std::string config_hash() const { return hex64(fnv1a64(gen_config.dump() + "#" + std::to_string(seed))); }

  nlohmann::json to_json() const {
    return {{"format_version", format_version},
            {"num_samples", num_samples},
            {"views_per_sample", views},
            {"image_height", height},
            {"image_width", width},
            {"property_acronyms", property_acronyms},
            {"split", {{"train", train}, {"val", val}}},
            {"seed", seed},
            {"gen_config", gen_config},
            {"categories", categories},
            {"config_hash", config_hash()}};
  }

  /// Parses and validates; `source` names the file in errors.
  static DatasetManifest from_json(const nlohmann::json& j, const std::string& source) {
    auto fail = [&](const std::string& what) -> void { throw DataError(source + ": " + what); };
    DatasetManifest m;
    try {
      m.format_version = j.at("format_version").get<int>();
      if (m.format_version != kDatasetFormatVersion) {
        fail("unknown format_version " + std::to_string(m.format_version));
      }
      m.num_samples = j.at("num_samples").get<std::size_t>();
      m.views = j.at("views_per_sample").get<std::size_t>();
      m.height = j.at("image_height").get<std::size_t>();
      m.width = j.at("image_width").get<std::size_t>();
      m.property_acronyms = j.at("property_acronyms").get<std::vector<std::string>>();
      m.train = j.at("split").at("train").get<std::vector<std::size_t>>();
      m.val = j.at("split").at("val").get<std::vector<std::size_t>>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.gen_config = j.at("gen_config");
      if (j.contains("categories")) m.categories = j.at("categories").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed manifest: ") + e.what());
    }
    m.validate(source);
    return m;
  }

  void validate(const std::string& source) const {
    auto fail = [&](const std::string& what) { throw DataError(source + ": " + what); };
    if (property_acronyms.size() != kNumProperties) fail("expected 15 property acronyms");
    for (std::size_t i = 0; i < kNumProperties; ++i)
      if (property_acronyms[i] != kPropertyRegistry[i].acronym) {
        fail("property order differs from registry at position " + std::to_string(i) + " ('" +
             property_acronyms[i] + "')");
      }
    if (views == 0 || height == 0 || width == 0) fail("zero-sized views");
    if (val.empty()) fail("validation split is empty");
    if (train.empty()) fail("training split is empty");
    std::vector<std::size_t> all(train);
    all.insert(all.end(), val.begin(), val.end());
    std::sort(all.begin(), all.end());
    if (all.size() != num_samples || std::adjacent_find(all.begin(), all.end()) != all.end() ||
        (!all.empty() && all.back() >= num_samples)) {
      fail("split ids must partition [0, num_samples)");
    }
  }
};

inline std::string sample_filename(std::size_t id) {
  std::ostringstream os;
  os << "sample_" << std::setw(5) << std::setfill('0') << id << ".vtp";
  return os.str();
}

inline void write_sample(const std::filesystem::path& path, const VisuoTactilePair& s) {
  ByteWriter w;
  w.bytes(kSampleMagic);
  w.u32(static_cast<std::uint32_t>(s.views));
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  w.f32s(s.images);
  w.u32(static_cast<std::uint32_t>(s.angles.size()));
  w.f32s(s.angles);
  w.f32s(s.measurements);
  w.save(path);
}

/// Reads and validates one sample file against the manifest geometry.
inline VisuoTactilePair read_sample(const std::filesystem::path& path, const DatasetManifest& m, std::size_t id) {
  ByteReader r = ByteReader::from_file(path);
  if (r.bytes(4) != kSampleMagic) r.fail("bad magic (expected VTP1)");
  VisuoTactilePair s;
  s.id = id;
  s.views = r.u32();
  s.height = r.u32();
  s.width = r.u32();
  if (s.views != m.views || s.height != m.height || s.width != m.width) {
    r.fail("dimension mismatch with manifest (" + std::to_string(s.views) + "x" + std::to_string(s.height) + "x" +
           std::to_string(s.width) + ")");
  }
  const std::size_t expected = s.views * s.height * s.width * 3 * 4 + 4 + s.views * 4 + kNumRepeats * kNumProperties * 4;
  if (r.remaining() != expected) {
    r.fail("size mismatch: " + std::to_string(r.remaining()) + " payload bytes, expected " + std::to_string(expected));
  }
  s.images.resize(s.views * s.height * s.width * 3);
  r.f32s(s.images);
  if (r.u32() != s.views) r.fail("angle count differs from view count");
  s.angles.resize(s.views);
  r.f32s(s.angles);
  r.f32s(s.measurements);
  for (float v : s.images)
    if (!(v >= 0.0f && v <= 1.0f)) r.fail("pixel value outside [0,1]");
  for (float v : s.angles)
    if (!(v >= -45.0f && v <= 45.0f)) r.fail("angle outside [-45,45]");
  for (float v : s.measurements)
    if (!(v >= 0.0f && v <= 100.0f)) r.fail("tactile value outside [0,100]");
  s.split = std::find(m.val.begin(), m.val.end(), id) != m.val.end() ? Split::kVal : Split::kTrain;
  return s;
}

/// Read access to a dataset directory, or to an in-memory set of pairs that
/// follows the same manifest rules. Samples are loaded on demand.
class Dataset {
 public:
  static Dataset open(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open '" + manifest_path.string() + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(manifest_path.string() + ": invalid JSON: " + e.what());
    }
    Dataset d;
    d.dir_ = dir;
    d.manifest_ = DatasetManifest::from_json(j, manifest_path.string());
    return d;
  }

  static Dataset in_memory(DatasetManifest manifest, std::vector<VisuoTactilePair> pairs) {
    manifest.validate("<memory>");
    if (pairs.size() != manifest.num_samples) throw DataError("<memory>: pair count differs from manifest");
    Dataset d;
    d.manifest_ = std::move(manifest);
    auto store = std::make_shared<std::vector<VisuoTactilePair>>(std::move(pairs));
    for (auto& p : *store) {
      p.split = std::find(d.manifest_.val.begin(), d.manifest_.val.end(), p.id) != d.manifest_.val.end() ? Split::kVal
                                                                                                     : Split::kTrain;
    }
    d.memory_ = std::move(store);
    return d;
  }

  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::vector<std::size_t>& train_ids() const noexcept { return manifest_.train; }
  const std::vector<std::size_t>& val_ids() const noexcept { return manifest_.val; }
  std::size_t size() const noexcept { return manifest_.num_samples; }
  const std::filesystem::path& directory() const noexcept { return dir_; }

  VisuoTactilePair load(std::size_t id) const {
    if (id >= manifest_.num_samples) throw DataError("sample id " + std::to_string(id) + " out of range");
    if (memory_) return (*memory_)[id];
    return read_sample(dir_ / sample_filename(id), manifest_, id);
  }

 private:
  std::filesystem::path dir_;
  DatasetManifest manifest_;
  std::shared_ptr<const std::vector<VisuoTactilePair>> memory_;
};

/// Seeded shuffle into train/val id lists (each sorted).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> assign_split(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = make_rng(seed, {0x5b1});
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t val_count = split_counts(n).second;
  std::vector<std::size_t> val(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(val_count));
  std::vector<std::size_t> train(ids.begin() + static_cast<std::ptrdiff_t>(val_count), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

/// Material, measurements and all views for sample `id`. A pure function
/// of (config, seed, id).
inline std::pair<MaterialSample, VisuoTactilePair> generate_sample(const GenConfig& cfg, std::uint64_t seed,
                                                                   std::size_t id) {
  Rng rng = make_rng(seed, {0x5a3, id});
  MaterialSample m = sample_material(rng, cfg);
  VisuoTactilePair s;
  s.id = id;
  s.views = cfg.views;
  s.height = cfg.height;
  s.width = cfg.width;
  const auto meas = measure_tactile(m, rng, cfg.sigma_meas);
  std::copy(meas.begin(), meas.end(), s.measurements.begin());
  s.images.reserve(cfg.views * cfg.height * cfg.width * 3);
  for (std::size_t k = 0; k < cfg.views; ++k) {
    const double a = view_angle(k, cfg.views);
    s.angles.push_back(static_cast<float>(a));
    const Image img = render_view(m, a, cfg);
    s.images.insert(s.images.end(), img.pixels.begin(), img.pixels.end());
  }
  return {m, s};
}

inline DatasetManifest make_manifest(const GenConfig& cfg, std::uint64_t seed) {
  DatasetManifest m;
  m.num_samples = cfg.num_samples;
  m.views = cfg.views;
  m.height = cfg.height;
  m.width = cfg.width;
  for (const auto& p : kPropertyRegistry) m.property_acronyms.emplace_back(p.acronym);
  std::tie(m.train, m.val) = assign_split(cfg.num_samples, seed);
  m.seed = seed;
  m.gen_config = cfg.to_json();
  return m;
}

inline void write_manifest(const std::filesystem::path& dir, const DatasetManifest& m) {
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << m.to_json().dump(2) << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

/// Writes manifest.json and one sample_<id>.vtp per material into `dir`.
inline DatasetManifest generate_dataset(const GenConfig& cfg, std::uint64_t seed, const std::filesystem::path& dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create dataset directory '" + dir.string() + "'");
  }
  DatasetManifest m = make_manifest(cfg, seed);
  for (std::size_t id = 0; id < cfg.num_samples; ++id) {
    auto [material, sample] = generate_sample(cfg, seed, id);
    m.categories.emplace_back(kMaterialCategories[material.category]);
    write_sample(dir / sample_filename(id), sample);
  }
  write_manifest(dir, m);
  return m;
}

/// In-memory equivalent of generate_dataset, for tests and experiments that
/// do not need files.
inline Dataset generate_in_memory(const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DatasetManifest m = make_manifest(cfg, seed);
  std::vector<VisuoTactilePair> pairs;
  for (std::size_t id = 0; id < cfg.num_samples; ++id) {
    auto [material, sample] = generate_sample(cfg, seed, id);
    m.categories.emplace_back(kMaterialCategories[material.category]);
    pairs.push_back(std::move(sample));
  }
  return Dataset::in_memory(std::move(m), std::move(pairs));
}

}  // namespace vtl
