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

#include <span>
#include <vector>

#include "vtl/gradcore/tensor.hpp"
#include "vtl/synthsps/dataset.hpp"

namespace vtl {

/// HWC pixels in [0,1] to centered CHW values.
inline void hwc_to_chw(std::span<const float> hwc, std::size_t h, std::size_t w, float* out) {
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out[(c * h + y) * w + x] = hwc[(y * w + x) * 3 + c] - 0.5f;
}

/// One image per sample, ready for the encoders.
struct ImageSet {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::size_t> ids;
  std::vector<float> images;  ///< n x 3 x H x W, centered
  std::vector<TactileVector> targets;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t image_size() const noexcept { return 3 * height * width; }

  /// [B,3,H,W] tensor for the given row indices.
  template <typename T = float>
  Tensor<T> batch(std::span<const std::size_t> rows) const {
    Tensor<T> t({rows.size(), 3, height, width});
    const std::size_t n = image_size();
    for (std::size_t b = 0; b < rows.size(); ++b)
      std::copy_n(images.begin() + static_cast<std::ptrdiff_t>(rows[b] * n), n, t.raw() + b * n);
    return t;
  }

  std::vector<TactileVector> batch_targets(std::span<const std::size_t> rows) const {
    std::vector<TactileVector> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(targets[r]);
    return out;
  }
};

/// Nadir-most view of every listed sample.
inline ImageSet load_nadir_images(const Dataset& ds, std::span<const std::size_t> ids) {
  ImageSet set;
  set.height = ds.manifest().height;
  set.width = ds.manifest().width;
  set.images.resize(ids.size() * set.image_size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const VisuoTactilePair s = ds.load(ids[i]);
    hwc_to_chw(s.view(nadir_index(s.angles)), set.height, set.width, set.images.data() + i * set.image_size());
    set.ids.push_back(ids[i]);
    set.targets.push_back(s.target());
  }
  return set;
}

/// Every view of every listed sample, [sample][view] order.
struct MultiViewSet {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t views = 0;
  std::vector<std::size_t> ids;
  std::vector<float> images;  ///< n x N x 3 x H x W, centered
  std::vector<TactileVector> targets;
  std::vector<float> angles;  ///< angles of sample 0; identical across samples

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t image_size() const noexcept { return 3 * height * width; }

  const float* image(std::size_t row, std::size_t view) const {
    return images.data() + (row * views + view) * image_size();
  }

  /// [B,3,H,W] holding view q[b] of sample rows[b].
  template <typename T = float>
  Tensor<T> batch(std::span<const std::size_t> rows, std::span<const std::size_t> view_of_row) const {
    Tensor<T> t({rows.size(), 3, height, width});
    const std::size_t n = image_size();
    for (std::size_t b = 0; b < rows.size(); ++b) std::copy_n(image(rows[b], view_of_row[b]), n, t.raw() + b * n);
    return t;
  }

  /// Same view for every row.
  template <typename T = float>
  Tensor<T> batch(std::span<const std::size_t> rows, std::size_t view) const {
    std::vector<std::size_t> v(rows.size(), view);
    return batch<T>(rows, v);
  }

  std::vector<TactileVector> batch_targets(std::span<const std::size_t> rows) const {
    std::vector<TactileVector> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(targets[r]);
    return out;
  }

  /// Single-view projection used by the single-image models.
  ImageSet select_view(std::size_t view) const {
    ImageSet s;
    s.height = height;
    s.width = width;
    s.ids = ids;
    s.targets = targets;
    s.images.resize(size() * image_size());
    for (std::size_t r = 0; r < size(); ++r) std::copy_n(image(r, view), image_size(), s.images.data() + r * image_size());
    return s;
  }
};

inline MultiViewSet load_all_views(const Dataset& ds, std::span<const std::size_t> ids) {
  MultiViewSet set;
  set.height = ds.manifest().height;
  set.width = ds.manifest().width;
  set.views = ds.manifest().views;
  set.images.resize(ids.size() * set.views * set.image_size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const VisuoTactilePair s = ds.load(ids[i]);
    if (i == 0) set.angles = s.angles;
    for (std::size_t k = 0; k < set.views; ++k)
      hwc_to_chw(s.view(k), set.height, set.width, set.images.data() + (i * set.views + k) * set.image_size());
    set.ids.push_back(ids[i]);
    set.targets.push_back(s.target());
  }
  return set;
}

}  // namespace vtl
