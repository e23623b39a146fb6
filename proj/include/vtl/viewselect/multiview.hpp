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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vtl/crossmodal/data.hpp"
#include "vtl/crossmodal/model.hpp"
#include "vtl/viewselect/selector.hpp"

namespace vtl {

enum class FusionMode { kConcat, kMaxPool };

inline std::string fusion_mode_name(FusionMode f) { return f == FusionMode::kConcat ? "concat" : "maxpool"; }

/// Concatenation in the given order, or elementwise max.
template <typename T>
Var fuse_views(Graph<T>& g, std::span<const Var> features, FusionMode mode) {
  if (features.empty()) throw InvalidArgument("fuse_views: no views");
  return mode == FusionMode::kConcat ? g.concat(features) : g.maximum(features);
}

struct MultiViewSpec {
  EncoderSpec encoder;
  std::size_t latent_dim = 100;
  FusionMode fusion = FusionMode::kConcat;
  /// Number of fused views each head accepts. Concat fusion needs one head
  /// per subset size; max pooling uses a single head for any count.
  std::vector<std::size_t> head_sizes{3};

  std::size_t head_input(std::size_t views) const {
    return fusion == FusionMode::kConcat ? views * latent_dim : latent_dim;
  }
};

/// Shared per-view image encoder, late fusion, then a small MLP head
/// squashed to [0,100].
template <typename T>
struct MultiViewNet {
  MultiViewSpec spec;
  TargetSpec target;
  Standardizer stats;
  ImageEncoder<T> encoder;
  std::vector<Mlp<T>> heads;

  MultiViewNet() = default;
  MultiViewNet(const MultiViewSpec& s, const TargetSpec& t, const Standardizer& st, std::uint64_t seed)
      : spec(s), target(t), stats(st) {
    if (s.head_sizes.empty()) throw InvalidArgument("multi-view net needs at least one head");
    if (s.fusion == FusionMode::kMaxPool && s.head_sizes.size() != 1) {
      throw InvalidArgument("max-pool fusion takes a single head");
    }
    Rng rng = make_rng(seed, {0x3f1, t.joint ? 99u : t.property});
    encoder = ImageEncoder<T>("mv.enc", s.encoder, s.latent_dim, rng, Init::kXavier);
    for (std::size_t size : s.head_sizes) {
      heads.emplace_back("mv.head" + std::to_string(size), s.head_input(size), s.encoder.hidden, t.outputs(), rng,
                         Init::kXavier);
    }
  }

  ParamList<T> encoder_params() {
    ParamList<T> out;
    encoder.collect(out);
    return out;
  }

  ParamList<T> head_params() {
    ParamList<T> out;
    for (auto& h : heads) h.collect(out);
    return out;
  }

  ParamList<T> all_params() {
    ParamList<T> out = encoder_params();
    for (auto* p : head_params()) out.push_back(p);
    return out;
  }

  std::size_t head_index(std::size_t views) const {
    if (spec.fusion == FusionMode::kMaxPool) return 0;
    for (std::size_t i = 0; i < spec.head_sizes.size(); ++i)
      if (spec.head_sizes[i] == views) return i;
    throw InvalidArgument("multi-view net has no head for " + std::to_string(views) + " views");
  }

  /// Per-view features [B,latent] from images [B,3,H,W].
  Var encode(Graph<T>& g, Var images) {
    const Shape s = g.value(images).shape();
    if (s.size() != 4 || s[1] != 3 || s[2] != spec.encoder.height || s[3] != spec.encoder.width) {
      throw ShapeError("multi-view net: expected images [B,3," + std::to_string(spec.encoder.height) + "," +
                       std::to_string(spec.encoder.width) + "], got " + shape_string(s));
    }
    return encoder(g, images);
  }

  Var fuse(Graph<T>& g, std::span<const Var> features) { return fuse_views(g, features, spec.fusion); }

  /// Raw [0,100] estimate from a fused feature row per sample.
  Var head(Graph<T>& g, Var fused, std::size_t views) {
    return g.scale(g.sigmoid(heads[head_index(views)](g, fused)), T(100));
  }

  Var forward(Graph<T>& g, std::span<const Var> view_images) {
    std::vector<Var> features;
    features.reserve(view_images.size());
    for (Var v : view_images) features.push_back(encode(g, v));
    return head(g, fuse(g, features), view_images.size());
  }

  Var standardize_outputs(Graph<T>& g, Var raw) {
    std::vector<T> scale(target.outputs()), shift(target.outputs());
    for (std::size_t j = 0; j < target.outputs(); ++j) {
      const std::size_t p = target.index(j);
      scale[j] = static_cast<T>(1.0 / stats.std[p]);
      shift[j] = static_cast<T>(-stats.mean[p] / stats.std[p]);
    }
    return g.column_affine(raw, std::move(scale), std::move(shift));
  }

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

/// Encoder outputs for every (sample, view) of a set, computed once while
/// the encoder is frozen.
struct FeatureCache {
  std::size_t samples = 0;
  std::size_t views = 0;
  std::size_t latent = 0;
  std::vector<float> data;  ///< samples x views x latent

  static FeatureCache build(MultiViewNet<float>& net, const MultiViewSet& set) {
    FeatureCache c;
    c.samples = set.size();
    c.views = set.views;
    c.latent = net.spec.latent_dim;
    c.data.resize(c.samples * c.views * c.latent);
    constexpr std::size_t chunk = 64;
    for (std::size_t v = 0; v < set.views; ++v) {
      for (std::size_t start = 0; start < set.size(); start += chunk) {
        std::vector<std::size_t> rows(std::min(chunk, set.size() - start));
        std::iota(rows.begin(), rows.end(), start);
        Graph<float> g;
        const auto& f = g.value(net.encode(g, g.input(set.batch(rows, v))));
        for (std::size_t b = 0; b < rows.size(); ++b)
          std::copy_n(f.raw() + b * c.latent, c.latent, c.data.data() + ((start + b) * c.views + v) * c.latent);
      }
    }
    return c;
  }

  /// Features of view `view` for the given rows, [B,latent].
  Tensor<float> view_batch(std::span<const std::size_t> rows, std::size_t view) const {
    if (view >= views) throw InvalidArgument("feature cache: view index out of range");
    Tensor<float> t({rows.size(), latent});
    for (std::size_t b = 0; b < rows.size(); ++b)
      std::copy_n(data.data() + (rows[b] * views + view) * latent, latent, t.raw() + b * latent);
    return t;
  }
};

}  // namespace vtl
