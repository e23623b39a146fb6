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
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "support/model_fixtures.hpp"
#include "support/op_fixtures.hpp"
#include "support/temp_dir.hpp"
#include "vtl/common/checkpoint.hpp"
#include "vtl/crossmodal/clustering.hpp"
#include "vtl/crossmodal/losses.hpp"
#include "vtl/crossmodal/model.hpp"
#include "vtl/crossmodal/pseudo_labels.hpp"
#include "vtl/crossmodal/train.hpp"
#include "vtl/synthsps/dataset.hpp"

namespace vtl {
namespace {

using testing::make_composite_fixture;

ModelSpec small_spec(bool zero_heads = false) {
  ModelSpec s;
  s.encoder.height = s.encoder.width = 16;
  s.encoder.channels = {4, 8, 8};
  s.encoder.hidden = 16;
  s.latent_dim = 10;
  s.zero_init_heads = zero_heads;
  return s;
}

Tensor<float> random_images(std::size_t n, std::size_t hw, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({n, 3, hw, hw});
  for (auto& v : t.data()) v = static_cast<float>(uniform01(rng) - 0.5);
  return t;
}

std::vector<float> row(const Tensor<float>& t, std::size_t r) {
  const std::size_t c = t.dim(1);
  return {t.raw() + r * c, t.raw() + (r + 1) * c};
}

TEST(EmbedVisual, ZeroImageWithZeroHeadGivesZero) {
  CrossModalModel<float> m(small_spec(true), TargetSpec::all(), Standardizer::identity(), 1);
  Graph<float> g;
  const auto& e = g.value(m.embed_visual(g, g.input(Tensor<float>({2, 3, 16, 16}))));
  ASSERT_EQ(e.shape(), (Shape{2, 10}));
  for (float v : e.data()) EXPECT_EQ(v, 0.0f);
}

TEST(EmbedVisual, DeterministicAndDiscriminative) {
  CrossModalModel<float> m(small_spec(), TargetSpec::all(), Standardizer::identity(), 2);
  const Tensor<float> x = random_images(2, 16, 3);
  Graph<float> g1, g2;
  const auto a = g1.value(m.embed_visual(g1, g1.input(x)));
  const auto b = g2.value(m.embed_visual(g2, g2.input(x)));
  EXPECT_EQ(a, b);
  EXPECT_NE(row(a, 0), row(a, 1));
  for (float v : a.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(EmbedVisual, ShapeMismatchThrows) {
  CrossModalModel<float> m(small_spec(), TargetSpec::all(), Standardizer::identity(), 2);
  Graph<float> g;
  EXPECT_THROW(m.embed_visual(g, g.input(Tensor<float>({1, 3, 8, 8}))), ShapeError);
  EXPECT_THROW(m.embed_visual(g, g.input(Tensor<float>({1, 1, 16, 16}))), ShapeError);
}

TEST(EmbedTactile, ZeroHeadDeterminismAndRange) {
  std::vector<TactileVector> rows(2);
  rows[0].fill(20.0);
  rows[1].fill(70.0);
  const Standardizer stats = Standardizer::fit(rows);
  CrossModalModel<float> zero(small_spec(true), TargetSpec::all(), stats, 1);
  Graph<float> g;
  for (float v : g.value(zero.embed_tactile(g, g.input(zero.standardize_tactile(rows)))).data()) EXPECT_EQ(v, 0.0f);

  CrossModalModel<float> m(small_spec(), TargetSpec::all(), stats, 1);
  Graph<float> g1, g2;
  const auto a = g1.value(m.embed_tactile(g1, g1.input(m.standardize_tactile(rows))));
  const auto b = g2.value(m.embed_tactile(g2, g2.input(m.standardize_tactile(rows))));
  EXPECT_EQ(a, b);
  EXPECT_NE(row(a, 0), row(a, 1));

  rows[1][3] = 100.5;
  EXPECT_THROW(m.standardize_tactile(rows), InvalidArgument);
  rows[1][3] = -1.0;
  EXPECT_THROW(m.standardize_tactile(rows), InvalidArgument);
}

TEST(LossEmb, ClosedForms) {
  Graph<double> g;
  Var a = g.input(Tensor<double>({1, 2}, {1, 0}));
  Var b = g.input(Tensor<double>({1, 2}, {0, 1}));
  EXPECT_DOUBLE_EQ(g.value(loss_emb(g, a, b)).item(), 2.0);
  EXPECT_DOUBLE_EQ(g.value(loss_emb(g, a, a)).item(), 0.0);
  EXPECT_THROW(loss_emb(g, a, g.input(Tensor<double>({1, 3}))), ShapeError);
}

TEST(LossEmb, MatchesDirectSumAndIsSymmetric) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_tensor({3, 7}, rng), y = testing::random_tensor({3, 7}, rng);
    double expected = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) expected += (x[i] - y[i]) * (x[i] - y[i]);
    expected /= 3.0;
    Graph<double> g;
    EXPECT_NEAR(g.value(loss_emb(g, g.input(x), g.input(y))).item(), expected, 1e-12);
    EXPECT_NEAR(g.value(loss_emb(g, g.input(y), g.input(x))).item(), expected, 1e-12);
  }
}

TEST(Estimate, ZeroPreactivationGivesFifty) {
  CrossModalModel<float> m(small_spec(true), TargetSpec::all(), Standardizer::identity(), 1);
  Graph<float> g;
  const auto& y = g.value(m.estimate(g, g.input(Tensor<float>({3, 10}))));
  ASSERT_EQ(y.shape(), (Shape{3, 15}));
  for (float v : y.data()) EXPECT_FLOAT_EQ(v, 50.0f);
}

TEST(Estimate, BoundedForRandomLatents) {
  CrossModalModel<float> m(small_spec(), TargetSpec::single(prop::mTX), Standardizer::identity(), 7);
  Rng rng(8);
  Tensor<float> z({10000, 10});
  std::normal_distribution<double> n(0.0, 20.0);
  for (auto& v : z.data()) v = static_cast<float>(n(rng));
  Graph<float> g;
  const auto& y = g.value(m.estimate(g, g.input(z)));
  ASSERT_EQ(y.shape(), (Shape{10000, 1}));
  for (float v : y.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 100.0f);
  }
  Graph<float> g2;
  EXPECT_EQ(g2.value(m.estimate(g2, g2.input(z))), y);
}

TEST(Adversarial, HalfEverywhereGivesTwoLogTwo) {
  Graph<double> g;
  Var half = g.input(Tensor<double>({4, 1}, 0.5));
  Var t = g.input(Tensor<double>({4, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}));
  const auto terms = loss_adversarial(g, half, half, t, t);
  EXPECT_NEAR(g.value(terms.disc).item(), 2.0 * std::log(2.0), 1e-12);
  // Identical tactile vectors: the distance term vanishes.
  EXPECT_NEAR(g.value(terms.gen).item(), std::log(2.0), 1e-12);
}

TEST(Adversarial, MatchesHandFormula) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dr = testing::random_tensor({5, 1}, rng, 0.05, 0.95);
    const auto df = testing::random_tensor({5, 1}, rng, 0.05, 0.95);
    const auto tf = testing::random_tensor({5, 4}, rng), tr = testing::random_tensor({5, 4}, rng);
    double disc = 0.0, gen = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      disc -= std::log(dr[i]) + std::log(1.0 - df[i]);
      gen -= std::log(df[i]);
      double d2 = 0.0;
      for (std::size_t j = 0; j < 4; ++j) d2 += std::pow(tf.at(i, j) - tr.at(i, j), 2);
      gen += std::sqrt(d2);
    }
    Graph<double> g;
    const auto terms = loss_adversarial(g, g.input(dr), g.input(df), g.input(tf), g.input(tr));
    EXPECT_NEAR(g.value(terms.disc).item(), disc / 5.0, 1e-12);
    EXPECT_NEAR(g.value(terms.gen).item(), gen / 5.0, 1e-12);
  }
}

TEST(LossClass, ClosedFormsAndErrors) {
  Graph<double> g;
  const std::vector<int> labels{0, 5};
  EXPECT_NEAR(g.value(loss_class(g, g.input(Tensor<double>({2, 6})), labels)).item(), std::log(6.0), 1e-12);
  double previous = 1e9;
  for (double margin : {1.0, 5.0, 20.0, 60.0}) {
    Tensor<double> logits({1, 6});
    logits[2] = margin;
    const std::vector<int> lab{2};
    const double l = g.value(loss_class(g, g.input(logits), lab)).item();
    EXPECT_LT(l, previous);
    previous = l;
  }
  EXPECT_LT(previous, 1e-20);
  const std::vector<int> bad{6};
  EXPECT_THROW(loss_class(g, g.input(Tensor<double>({1, 6})), bad), InvalidArgument);
}

TEST(LossClass, MatchesDirectFormula) {
  Rng rng(10);
  const auto logits = testing::random_tensor({4, 6}, rng, -3, 3);
  const std::vector<int> labels{1, 0, 5, 3};
  double expected = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 6; ++j) z += std::exp(logits.at(i, j));
    expected += std::log(z) - logits.at(i, static_cast<std::size_t>(labels[i]));
  }
  Graph<double> g;
  EXPECT_NEAR(g.value(loss_class(g, g.input(logits), labels)).item(), expected / 4.0, 1e-12);
}

TEST(TotalLoss, Arithmetic) {
  EXPECT_EQ(total_loss(LossParts{1.25, 7, 8, 9}, LossWeights{0, 0, 0}), 1.25);
  EXPECT_DOUBLE_EQ(total_loss(LossParts{1, 1, 1, 1}, LossWeights{0.5, 0.5, 0.5}), 2.5);
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const LossParts p{uniform01(rng), uniform01(rng), uniform01(rng), uniform01(rng)};
    const LossWeights w{uniform01(rng), uniform01(rng), uniform01(rng)};
    EXPECT_DOUBLE_EQ(total_loss(p, w), p.estimation + w.embedding * p.embedding + w.adversarial * p.adversarial +
                                           w.classification * p.classification);
  }
  EXPECT_THROW(total_loss(LossParts{}, LossWeights{-1, 0, 0}), InvalidArgument);
  EXPECT_THROW(total_loss(LossParts{std::nan(""), 0, 0, 0}, LossWeights{}), NumericError);

  Graph<double> g;
  LossTerms<double> t{g.input(Tensor<double>::scalar(1)), g.input(Tensor<double>::scalar(1)),
                      g.input(Tensor<double>::scalar(1)), g.input(Tensor<double>::scalar(1))};
  EXPECT_DOUBLE_EQ(g.value(total_loss(g, t, LossWeights{0.5, 0.5, 0.5})).item(), 2.5);
  EXPECT_DOUBLE_EQ(g.value(total_loss(g, t, LossWeights{0, 0, 0})).item(), 1.0);
}

TEST(GradientCheck, CombinedObjectiveOnFourSamples) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    {
      const bool joint = seed % 2 == 0;
      auto f = make_composite_fixture(seed, joint);
      EXPECT_LE(testing::composite_max_error(f, testing::total_objective(f), f.model.main_params()), 1e-3)
          << "seed " << seed << " joint " << joint;
      EXPECT_LE(testing::composite_max_error(f, testing::discriminator_objective(f), f.model.disc_params()), 1e-3)
          << "seed " << seed << " joint " << joint;
    }
  }
}

// ---- clustering -------------------------------------------------------------

RowMatrix blobs(std::size_t per, double separation, std::uint64_t seed, std::vector<int>* truth) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  RowMatrix x(static_cast<Eigen::Index>(2 * per), 4);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const int b = i < per ? 0 : 1;
    if (truth) truth->push_back(b);
    for (Eigen::Index j = 0; j < 4; ++j) x(static_cast<Eigen::Index>(i), j) = n(rng) + (j == 0 ? b * separation : 0.0);
  }
  return x;
}

TEST(KMeans, RecoversSeparatedBlobs) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<int> truth;
    const RowMatrix x = blobs(50, 10.0, seed, &truth);
    Rng rng(seed);
    const auto r = kmeans(x, 2, rng);
    const int flip = r.labels[0] != truth[0];
    for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_EQ(r.labels[i] ^ flip, truth[i]);
  }
}

TEST(KMeans, SingleClusterIsTheMean) {
  const RowMatrix x = blobs(20, 3.0, 1, nullptr);
  Rng rng(1);
  const auto r = kmeans(x, 1, rng);
  for (int l : r.labels) EXPECT_EQ(l, 0);
  EXPECT_LT((r.centroids.row(0) - x.colwise().mean()).norm(), 1e-12);
}

TEST(KMeans, InertiaNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng data(seed);
    RowMatrix x(60, 3);
    std::normal_distribution<double> n(0, 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(data);
    for (std::size_t k : {2u, 3u, 6u, 10u}) {
      Rng rng(seed + 100);
      const auto r = kmeans(x, k, rng);
      for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
        EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
      std::set<int> used(r.labels.begin(), r.labels.end());
      EXPECT_LE(used.size(), k);
      for (int l : r.labels) EXPECT_LT(l, static_cast<int>(k));
    }
  }
}

TEST(KMeans, RejectsTooManyClusters) {
  RowMatrix x(3, 2);
  x.setRandom();
  Rng rng(1);
  EXPECT_THROW(kmeans(x, 4, rng), InvalidArgument);
}

TEST(Pca, OrthonormalAndMonotoneReconstruction) {
  Rng rng(12);
  std::normal_distribution<double> n(0, 1);
  RowMatrix x(40, 8);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = n(rng) * (j + 1);
  double previous = 1e300;
  for (std::size_t d = 1; d <= 8; ++d) {
    const Pca p = Pca::fit(x, d);
    const Eigen::MatrixXd gram = p.components * p.components.transpose();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))).cwiseAbs().maxCoeff(), 1e-5);
    const double err = p.reconstruction_error(x);
    EXPECT_LE(err, previous + 1e-9);
    previous = err;
  }
  EXPECT_LT(previous, 1e-18 + 1e-12);
  EXPECT_THROW(Pca::fit(x, 9), InvalidArgument);
}

TEST(PseudoLabels, OrderInvariantAndComplete) {
  Rng rng(13);
  std::normal_distribution<double> n(0, 1);
  RowMatrix v(30, 12);
  std::vector<TactileVector> t(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = 0; j < 12; ++j) v(i, j) = n(rng);
    for (auto& x : t[static_cast<std::size_t>(i)]) x = 50 + 10 * n(rng);
  }
  const auto a = build_pseudo_labels(v, t, 5, 4, 77);
  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  RowMatrix v2(30, 12);
  std::vector<TactileVector> t2(30);
  for (std::size_t i = 0; i < 30; ++i) {
    v2.row(static_cast<Eigen::Index>(i)) = v.row(static_cast<Eigen::Index>(perm[i]));
    t2[i] = t[perm[i]];
  }
  const auto b = build_pseudo_labels(v2, t2, 5, 4, 77);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(b.labels[i], a.labels[perm[i]]);
  for (int l : a.labels) {
    EXPECT_GE(l, 0);
    EXPECT_LT(l, 4);
  }
  EXPECT_EQ(a.labeler.assign(v, t), a.labels);
  EXPECT_THROW(build_pseudo_labels(v, t, 5, 31, 1), InvalidArgument);
}

// ---- training -----------------------------------------------------------------

GenConfig tiny_config(std::size_t samples) {
  GenConfig c = smoke_preset();
  c.num_samples = samples;
  c.views = 3;
  return c;
}

CrossModalConfig tiny_train_config(TargetMode mode = TargetMode::kJoint) {
  CrossModalConfig c;
  c.target_mode = mode;
  c.epochs = 1;
  c.clusters = 3;
  c.encoder.channels = {4, 8, 8};
  c.latent_dim = 8;
  c.encoder.hidden = 16;
  c.learning_rate = 1e-3;
  return c;
}

TEST(Training, SmokeRunCheckpointRoundTrip) {
  const Dataset ds = generate_in_memory(tiny_config(10), 3);
  const ImageSet train = load_nadir_images(ds, ds.train_ids());
  const ImageSet val = load_nadir_images(ds, ds.train_ids());
  for (bool regression : {false, true}) {
    auto res = regression ? train_regression_baseline(train, tiny_train_config())
                          : train_cross_modal(train, tiny_train_config());
    ASSERT_EQ(res.log.epochs.size(), 1u);
    const MetricsReport before = res.model.evaluate(val);
    testing::TempDir dir("vtl_ck");
    res.model.to_checkpoint().save(dir / "model.ckpt");
    TactileEstimator loaded = TactileEstimator::from_checkpoint(Checkpoint::load(dir / "model.ckpt"));
    const MetricsReport after = loaded.evaluate(val);
    EXPECT_EQ(loaded.regression, regression);
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      EXPECT_NEAR(after.properties[p].r_squared, before.properties[p].r_squared, 1e-6);
      EXPECT_NEAR(after.properties[p].mae, before.properties[p].mae, 1e-6);
    }
    EXPECT_EQ(loaded.labeler.has_value(), !regression);
  }
}

TEST(Training, PerPropertyModeTrainsFifteenNetworks) {
  const Dataset ds = generate_in_memory(tiny_config(10), 4);
  const ImageSet train = load_nadir_images(ds, ds.train_ids());
  auto res = train_cross_modal(train, tiny_train_config(TargetMode::kPerProperty));
  EXPECT_EQ(res.model.nets.size(), 15u);
  EXPECT_EQ(res.log.epochs.size(), 15u);
  for (const auto& e : res.log.epochs) {
    EXPECT_GT(e.embedding, 0.0);
    EXPECT_GT(e.adversarial, 0.0);
    EXPECT_GT(e.classification, 0.0);
    EXPECT_GT(e.discriminator, 0.0);
  }
}

TEST(Training, DeterministicForSeed) {
  const Dataset ds = generate_in_memory(tiny_config(12), 5);
  const ImageSet train = load_nadir_images(ds, ds.train_ids());
  auto cfg = tiny_train_config();
  cfg.epochs = 2;
  auto a = train_cross_modal(train, cfg), b = train_cross_modal(train, cfg);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  EXPECT_EQ(a.model.predict(train), b.model.predict(train));
  auto r1 = train_regression_baseline(train, cfg), r2 = train_regression_baseline(train, cfg);
  EXPECT_EQ(r1.model.predict(train), r2.model.predict(train));
  cfg.seed = 1;
  auto c = train_regression_baseline(train, cfg);
  EXPECT_NE(c.model.predict(train), r1.model.predict(train));
}

TEST(Checkpoint, RejectsCorruptionAndRegistryMismatch) {
  const Dataset ds = generate_in_memory(tiny_config(10), 3);
  const ImageSet train = load_nadir_images(ds, ds.train_ids());
  auto res = train_regression_baseline(train, tiny_train_config());
  Checkpoint c = res.model.to_checkpoint();
  testing::TempDir dir("vtl_ck2");
  c.save(dir / "a.ckpt");
  const auto size = std::filesystem::file_size(dir / "a.ckpt");
  std::filesystem::resize_file(dir / "a.ckpt", size - 3);
  EXPECT_THROW(Checkpoint::load(dir / "a.ckpt"), DataError);

  Checkpoint swapped = c;
  std::string order = TactileEstimator::registry_string();
  order.replace(0, 7, "fST,fRS");
  ASSERT_NE(order, TactileEstimator::registry_string());
  swapped.put_string("meta/property_acronyms", order);
  EXPECT_THROW(TactileEstimator::from_checkpoint(swapped), DataError);

  const auto bytes = c.serialize();
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CKPT");
  Checkpoint parsed = Checkpoint::parse(ByteReader(bytes, "mem"));
  ASSERT_EQ(parsed.entries().size(), c.entries().size());
  for (std::size_t i = 0; i < c.entries().size(); ++i) {
    EXPECT_EQ(parsed.entries()[i].first, c.entries()[i].first);
    EXPECT_EQ(parsed.entries()[i].second, c.entries()[i].second);
  }
  EXPECT_THROW(res.model.check_geometry(32, 32), DataError);
}

ImageSet small_split(std::size_t samples, std::uint64_t seed, bool train) {
  GenConfig cfg = smoke_preset();
  cfg.num_samples = samples;
  cfg.views = 3;
  const Dataset ds = generate_in_memory(cfg, seed);
  return load_nadir_images(ds, train ? ds.train_ids() : ds.val_ids());
}

TEST(Training, EstimationLossFallsOverThirtyEpochs) {
  const ImageSet train = small_split(120, 21, true);
  CrossModalConfig cfg;
  cfg.target_mode = TargetMode::kJoint;
  cfg.clusters = 4;
  const auto res = train_cross_modal(train, cfg);
  ASSERT_EQ(res.log.epochs.size(), 30u);
  EXPECT_LT(res.log.epochs.back().estimation, res.log.epochs.front().estimation);
}

TEST(Training, EmbeddingLossFallsWithoutAdversaryOrClasses) {
  const ImageSet train = small_split(120, 22, true);
  CrossModalConfig cfg;
  cfg.target_mode = TargetMode::kJoint;
  cfg.weights = {1.0, 0.0, 0.0};
  cfg.epochs = 10;
  const auto res = train_cross_modal(train, cfg);
  EXPECT_LT(res.log.epochs.back().embedding, res.log.epochs.front().embedding);
  EXPECT_FALSE(res.pseudo_labels.has_value());
}

TEST(Training, UnweightedCrossModalTracksRegression) {
  double gap = 0.0;
  for (std::uint64_t seed : {31u, 32u}) {
    const ImageSet train = small_split(200, seed, true);
    const ImageSet val = small_split(200, seed, false);
    CrossModalConfig cfg;
    cfg.target_mode = TargetMode::kJoint;
    cfg.weights = {0.0, 0.0, 0.0};
    cfg.freeze_tactile_encoder = true;
    cfg.learning_rate = 1e-3;
    cfg.seed = seed;
    const double cm = train_cross_modal(train, cfg).model.evaluate(val).mean_r_squared;
    const double reg = train_regression_baseline(train, cfg).model.evaluate(val).mean_r_squared;
    gap += std::abs(cm - reg) / 2.0;
  }
  EXPECT_LT(gap, 0.1);
}

TEST(Training, ConstantTargetsReachNoiseFloor) {
  // Every material has the same true vector; measurements add N(0, 2) noise,
  // so the five-repeat mean carries variance 4/5.
  GenConfig cfg = tiny_config(60);
  DatasetManifest m = make_manifest(cfg, 6);
  std::vector<VisuoTactilePair> pairs;
  Rng rng(6);
  std::normal_distribution<double> noise(0.0, 2.0);
  for (std::size_t id = 0; id < cfg.num_samples; ++id) {
    auto s = generate_sample(cfg, 6, id).second;
    for (auto& v : s.measurements) v = static_cast<float>(50.0 + noise(rng));
    pairs.push_back(std::move(s));
  }
  const Dataset ds = Dataset::in_memory(m, std::move(pairs));
  std::vector<std::size_t> all(60);
  std::iota(all.begin(), all.end(), 0);
  const ImageSet train = load_nadir_images(ds, std::span(all).first(50));
  const ImageSet val = load_nadir_images(ds, std::span(all).subspan(50));
  auto tc = tiny_train_config();
  tc.epochs = 40;
  auto res = train_regression_baseline(train, tc);
  const auto pred = res.model.predict(val);
  double mse = 0.0;
  for (std::size_t i = 0; i < val.size(); ++i)
    for (std::size_t p = 0; p < kNumProperties; ++p) mse += std::pow(pred[i][p] - val.targets[i][p], 2);
  mse /= static_cast<double>(val.size() * kNumProperties);
  EXPECT_LT(mse, 2.0 * 0.8);
  // Predictions collapse to (nearly) a constant.
  double spread = 0.0;
  for (std::size_t i = 1; i < val.size(); ++i) spread = std::max(spread, std::abs(pred[i][0] - pred[0][0]));
  EXPECT_LT(spread, 1.5);
}

}  // namespace
}  // namespace vtl
