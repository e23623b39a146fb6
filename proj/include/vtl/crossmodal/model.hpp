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
#include <cstdint>
#include <string>
#include <vector>

#include "vtl/error.hpp"
#include "vtl/gradcore/graph.hpp"
#include "vtl/gradcore/layers.hpp"
#include "vtl/gradcore/random.hpp"
#include "vtl/synthsps/registry.hpp"

namespace vtl {

/// Image geometry and widths of the convolutional encoders.
struct EncoderSpec {
  std::size_t height = 32;
  std::size_t width = 32;
  std::array<std::size_t, 3> channels{16, 32, 32};
  std::size_t hidden = 64;

  /// Spatial size after the three stride-2 blocks.
  static std::size_t reduce(std::size_t n) { return (((n + 1) / 2 + 1) / 2 + 1) / 2; }
  std::size_t trunk_height() const { return reduce(height); }
  std::size_t trunk_width() const { return reduce(width); }
  std::size_t trunk_features() const { return channels[2] * trunk_height() * trunk_width(); }
};

/// Three 3x3 stride-2 conv + ReLU blocks; x [B,3,H,W] -> [B,C,H/8,W/8].
template <typename T>
struct ConvTrunk {
  Conv2d<T> c1, c2, c3;

  ConvTrunk() = default;
  ConvTrunk(const std::string& name, const EncoderSpec& s, Rng& rng)
      : c1(name + ".c1", 3, s.channels[0], 3, 2, 1, rng),
        c2(name + ".c2", s.channels[0], s.channels[1], 3, 2, 1, rng),
        c3(name + ".c3", s.channels[1], s.channels[2], 3, 2, 1, rng) {}

  Var operator()(Graph<T>& g, Var x) { return g.relu(c3(g, g.relu(c2(g, g.relu(c1(g, x)))))); }

  void collect(ParamList<T>& out) {
    c1.collect(out);
    c2.collect(out);
    c3.collect(out);
  }
};

/// Two-layer perceptron with a ReLU hidden layer.
template <typename T>
struct Mlp {
  Dense<T> l1, l2;

  Mlp() = default;
  Mlp(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out, Rng& rng,
      Init last = Init::kXavier)
      : l1(name + ".l1", in, hidden, rng, Init::kHe), l2(name + ".l2", hidden, out, rng, last) {}

  Var operator()(Graph<T>& g, Var x) { return l2(g, g.relu(l1(g, x))); }

  void collect(ParamList<T>& out) {
    l1.collect(out);
    l2.collect(out);
  }
};

/// Conv trunk, global average pool, affine head.
template <typename T>
struct ImageEncoder {
  ConvTrunk<T> trunk;
  Dense<T> head;

  ImageEncoder() = default;
  ImageEncoder(const std::string& name, const EncoderSpec& s, std::size_t out, Rng& rng, Init head_init)
      : trunk(name + ".trunk", s, rng), head(name + ".head", s.channels[2], out, rng, head_init) {}

  Var operator()(Graph<T>& g, Var x) { return head(g, g.global_avg_pool(trunk(g, x))); }

  void collect(ParamList<T>& out) {
    trunk.collect(out);
    head.collect(out);
  }
};

/// Per-property z-score statistics from the training split.
struct Standardizer {
  TactileVector mean{};
  TactileVector std{};

  static Standardizer fit(const std::vector<TactileVector>& rows) {
    if (rows.empty()) throw InvalidArgument("standardizer: no rows");
    Standardizer s;
    for (const auto& r : rows)
      for (std::size_t p = 0; p < kNumProperties; ++p) s.mean[p] += r[p] / static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t p = 0; p < kNumProperties; ++p)
        s.std[p] += (r[p] - s.mean[p]) * (r[p] - s.mean[p]) / static_cast<double>(rows.size());
    for (auto& v : s.std) v = std::max(std::sqrt(v), 1e-3);
    // Checkpoints hold float32; keep the in-memory copy identical.
    for (auto* a : {&s.mean, &s.std})
      for (auto& v : *a) v = static_cast<float>(v);
    return s;
  }

  static Standardizer identity() {
    Standardizer s;
    s.mean.fill(0.0);
    s.std.fill(1.0);
    return s;
  }
};

/// Which properties a network predicts: all fifteen, or one.
struct TargetSpec {
  bool joint = true;
  std::size_t property = 0;

  static TargetSpec all() { return {true, 0}; }
  static TargetSpec single(std::size_t p) {
    if (p >= kNumProperties) throw InvalidArgument("target property index out of range");
    return {false, p};
  }
  std::size_t outputs() const { return joint ? kNumProperties : 1; }
  std::size_t index(std::size_t j) const { return joint ? j : property; }
};

struct ModelSpec {
  EncoderSpec encoder;
  std::size_t latent_dim = 50;
  std::size_t classes = 6;
  std::size_t disc_feature_dim = 32;
  bool regression = false;   ///< image encoder straight to the tactile output
  bool zero_init_heads = false;
};

/// Image-to-tactile network. In regression form only the image encoder is
/// present and maps directly to the output; otherwise the full set of
/// cross-modal modules is built.
template <typename T>
struct CrossModalModel {
  ModelSpec spec;
  TargetSpec target;
  Standardizer stats;
  ImageEncoder<T> ev;  ///< E_v
  Mlp<T> et;           ///< E_t
  Mlp<T> gt;           ///< G_t
  Mlp<T> cvt;          ///< C_vt
  ImageEncoder<T> fd;  ///< F_d, feeds the discriminator
  Mlp<T> d;            ///< D

  CrossModalModel() = default;
  CrossModalModel(const ModelSpec& s, const TargetSpec& t, const Standardizer& st, std::uint64_t seed)
      : spec(s), target(t), stats(st) {
    const Init head = s.zero_init_heads ? Init::kZero : Init::kXavier;
    Rng rng = make_rng(seed, {0xe5, t.joint ? 99u : t.property});
    if (s.regression) {
      ev = ImageEncoder<T>("ev", s.encoder, t.outputs(), rng, head);
      return;
    }
    ev = ImageEncoder<T>("ev", s.encoder, s.latent_dim, rng, head);
    et = Mlp<T>("et", kNumProperties, s.encoder.hidden, s.latent_dim, rng, head);
    gt = Mlp<T>("gt", s.latent_dim, s.encoder.hidden, t.outputs(), rng, head);
    cvt = Mlp<T>("cvt", s.latent_dim, s.encoder.hidden, s.classes, rng, head);
    EncoderSpec small = s.encoder;
    small.channels = {8, 16, 16};
    fd = ImageEncoder<T>("fd", small, s.disc_feature_dim, rng, Init::kXavier);
    d = Mlp<T>("d", s.disc_feature_dim + t.outputs(), s.encoder.hidden, 1, rng, Init::kXavier);
  }

  bool is_regression() const { return spec.regression; }

  /// Parameters updated by the main objective.
  ParamList<T> main_params() {
    ParamList<T> out;
    ev.collect(out);
    if (!spec.regression) {
      et.collect(out);
      gt.collect(out);
      cvt.collect(out);
    }
    return out;
  }

  ParamList<T> disc_params() {
    ParamList<T> out;
    if (!spec.regression) {
      fd.collect(out);
      d.collect(out);
    }
    return out;
  }

  ParamList<T> all_params() {
    ParamList<T> out = main_params();
    for (auto* p : disc_params()) out.push_back(p);
    return out;
  }

  void check_images(Graph<T>& g, Var images) const {
    const Shape& s = g.value(images).shape();
    if (s.size() != 4 || s[1] != 3 || s[2] != spec.encoder.height || s[3] != spec.encoder.width) {
      throw ShapeError("model: expected images [B,3," + std::to_string(spec.encoder.height) + "," +
                       std::to_string(spec.encoder.width) + "], got " + shape_string(s));
    }
  }

  /// e_v [B,L]; for a regression model, the raw output logits.
  Var embed_visual(Graph<T>& g, Var images) {
    check_images(g, images);
    return ev(g, images);
  }

  /// e_t [B,L] from standardized tactile vectors [B,15].
  Var embed_tactile(Graph<T>& g, Var tactile_std) { return et(g, tactile_std); }

  /// Tactile estimate in [0,100], [B,outputs].
  Var estimate(Graph<T>& g, Var latent) {
    Var logits = spec.regression ? latent : gt(g, latent);
    return g.scale(g.sigmoid(logits), T(100));
  }

  /// Maps raw [0,100] outputs to standardized units.
  Var standardize_outputs(Graph<T>& g, Var raw) {
    std::vector<T> scale(target.outputs()), shift(target.outputs());
    for (std::size_t j = 0; j < target.outputs(); ++j) {
      const std::size_t p = target.index(j);
      scale[j] = static_cast<T>(1.0 / stats.std[p]);
      shift[j] = static_cast<T>(-stats.mean[p] / stats.std[p]);
    }
    return g.column_affine(raw, std::move(scale), std::move(shift));
  }

  Var class_logits(Graph<T>& g, Var latent) { return cvt(g, latent); }

  Var disc_features(Graph<T>& g, Var images) { return fd(g, images); }

  /// D(f, t) in (0,1), [B,1]; `tactile_std` is [B,outputs].
  Var discriminate(Graph<T>& g, Var features, Var tactile_std) {
    const std::array<Var, 2> parts{features, tactile_std};
    return g.sigmoid(d(g, g.concat(parts)));
  }

  /// Standardized [n,15] tensor from raw tactile vectors. Throws if a value
  /// is outside [0,100].
  Tensor<T> standardize_tactile(const std::vector<TactileVector>& rows) const {
    Tensor<T> out({rows.size(), kNumProperties});
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t p = 0; p < kNumProperties; ++p) {
        const double v = rows[i][p];
        if (!(v >= 0.0 && v <= 100.0)) {
          throw InvalidArgument("tactile value " + std::to_string(v) + " for " +
                                std::string(kPropertyRegistry[p].acronym) + " outside [0,100]");
        }
        out.at(i, p) = static_cast<T>((v - stats.mean[p]) / stats.std[p]);
      }
    return out;
  }

  /// Standardized target columns [n,outputs].
  Tensor<T> standardized_targets(const std::vector<TactileVector>& rows) const {
    Tensor<T> out({rows.size(), target.outputs()});
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < target.outputs(); ++j) {
        const std::size_t p = target.index(j);
        out.at(i, j) = static_cast<T>((rows[i][p] - stats.mean[p]) / stats.std[p]);
      }
    return out;
  }
};

}  // namespace vtl
