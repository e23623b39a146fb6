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
#include <string>
#include <vector>

#include "vtl/common/checkpoint.hpp"
#include "vtl/crossmodal/clustering.hpp"
#include "vtl/crossmodal/data.hpp"
#include "vtl/crossmodal/model.hpp"

namespace vtl {

/// Frozen random conv trunk used as the visual feature extractor for
/// clustering; features are the flattened trunk output.
struct FeatureExtractor {
  EncoderSpec spec;
  ConvTrunk<float> trunk;

  FeatureExtractor() = default;
  FeatureExtractor(const EncoderSpec& s, std::uint64_t seed) : spec(s) {
    Rng rng = make_rng(seed, {0x1abe1});
    trunk = ConvTrunk<float>("labeler.trunk", s, rng);
    ParamList<float> ps;
    trunk.collect(ps);
    set_trainable(ps, false);
  }

  ParamList<float> params() {
    ParamList<float> ps;
    trunk.collect(ps);
    return ps;
  }

  RowMatrix extract(const ImageSet& set) {
    const std::size_t dim = spec.trunk_features();
    RowMatrix out(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(dim));
    constexpr std::size_t chunk = 64;
    for (std::size_t start = 0; start < set.size(); start += chunk) {
      std::vector<std::size_t> rows(std::min(chunk, set.size() - start));
      std::iota(rows.begin(), rows.end(), start);
      Graph<float> g;
      const Tensor<float>& f = g.value(trunk(g, g.input(set.batch(rows))));
      for (std::size_t b = 0; b < rows.size(); ++b)
        for (std::size_t j = 0; j < dim; ++j) out(static_cast<Eigen::Index>(start + b), static_cast<Eigen::Index>(j)) = f[b * dim + j];
    }
    return out;
  }
};

/// State needed to label new visuo-tactile samples the same way the
/// training split was labeled.
struct PseudoLabeler {
  Pca pca;
  ColumnScaler visual_scaler;
  ColumnScaler tactile_scaler;
  RowMatrix centroids;
  std::size_t k = 0;

  RowMatrix joint_features(const RowMatrix& visual, const std::vector<TactileVector>& tactile) const {
    if (static_cast<std::size_t>(visual.rows()) != tactile.size()) {
      throw ShapeError("pseudo labels: visual and tactile sample counts differ");
    }
    const RowMatrix v = visual_scaler.apply(pca.transform(visual));
    RowMatrix t(visual.rows(), static_cast<Eigen::Index>(kNumProperties));
    for (std::size_t i = 0; i < tactile.size(); ++i)
      for (std::size_t p = 0; p < kNumProperties; ++p) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = tactile[i][p];
    RowMatrix out(visual.rows(), v.cols() + t.cols());
    out << v, tactile_scaler.apply(t);
    return out;
  }

  std::vector<int> assign(const RowMatrix& visual, const std::vector<TactileVector>& tactile) const {
    return assign_clusters(centroids, joint_features(visual, tactile));
  }

  void save(Checkpoint& c, const std::string& prefix) const {
    auto put = [&](const std::string& name, const auto& m) {
      Tensor<float> t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) t.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = static_cast<float>(m(i, j));
      c.put(prefix + name, std::move(t));
    };
    put("pca.mean", pca.mean);
    put("pca.components", pca.components);
    put("visual.mean", visual_scaler.mean);
    put("visual.scale", visual_scaler.scale);
    put("tactile.mean", tactile_scaler.mean);
    put("tactile.scale", tactile_scaler.scale);
    put("centroids", centroids);
  }

  static PseudoLabeler load(const Checkpoint& c, const std::string& prefix) {
    auto get = [&](const std::string& name) {
      const auto& t = c.get(prefix + name);
      if (t.rank() != 2) throw DataError("checkpoint: '" + prefix + name + "' must be rank 2");
      RowMatrix m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
      for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.at(i, j);
      return m;
    };
    PseudoLabeler l;
    l.pca.mean = get("pca.mean").row(0);
    l.pca.components = get("pca.components");
    l.visual_scaler.mean = get("visual.mean").row(0);
    l.visual_scaler.scale = get("visual.scale").row(0);
    l.tactile_scaler.mean = get("tactile.mean").row(0);
    l.tactile_scaler.scale = get("tactile.scale").row(0);
    l.centroids = get("centroids");
    l.k = static_cast<std::size_t>(l.centroids.rows());
    return l;
  }
};

struct PseudoLabels {
  PseudoLabeler labeler;
  std::vector<int> labels;
  KMeansResult clustering;
};

/// PCA-reduce and standardize the visual features, standardize the tactile
/// vectors, concatenate, and cluster into k labels. Rows are processed in a
/// canonical (lexicographic) order, so the labels do not depend on how the
/// samples were ordered.
inline PseudoLabels build_pseudo_labels(const RowMatrix& visual, const std::vector<TactileVector>& tactile,
                                        std::size_t d_pca, std::size_t k, std::uint64_t seed) {
  const std::size_t n = tactile.size();
  if (static_cast<std::size_t>(visual.rows()) != n) throw ShapeError("pseudo labels: sample counts differ");
  if (k > n) {
    throw InvalidArgument("pseudo labels: k=" + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (tactile[a] != tactile[b]) return tactile[a] < tactile[b];
    for (Eigen::Index j = 0; j < visual.cols(); ++j)
      if (visual(static_cast<Eigen::Index>(a), j) != visual(static_cast<Eigen::Index>(b), j))
        return visual(static_cast<Eigen::Index>(a), j) < visual(static_cast<Eigen::Index>(b), j);
    return false;
  });
  RowMatrix v(visual.rows(), visual.cols());
  std::vector<TactileVector> tac(n);
  RowMatrix t(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kNumProperties));
  for (std::size_t i = 0; i < n; ++i) {
    v.row(static_cast<Eigen::Index>(i)) = visual.row(static_cast<Eigen::Index>(order[i]));
    tac[i] = tactile[order[i]];
    for (std::size_t p = 0; p < kNumProperties; ++p) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = tac[i][p];
  }

  PseudoLabels out;
  auto& l = out.labeler;
  l.pca = Pca::fit(v, std::min<std::size_t>(d_pca, static_cast<std::size_t>(v.cols())));
  l.visual_scaler = ColumnScaler::fit(l.pca.transform(v));
  l.tactile_scaler = ColumnScaler::fit(t);
  Rng rng = make_rng(seed, {0xc1u});
  out.clustering = kmeans(l.joint_features(v, tac), k, rng);
  l.centroids = out.clustering.centroids;
  l.k = k;
  out.labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) out.labels[order[i]] = out.clustering.labels[i];
  out.clustering.labels = out.labels;
  return out;
}

}  // namespace vtl
