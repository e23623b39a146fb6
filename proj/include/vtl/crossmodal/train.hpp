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
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtl/common/checkpoint.hpp"
#include "vtl/crossmodal/data.hpp"
#include "vtl/crossmodal/losses.hpp"
#include "vtl/crossmodal/model.hpp"
#include "vtl/crossmodal/pseudo_labels.hpp"
#include "vtl/gradcore/optimizer.hpp"
#include "vtl/metrics/metrics.hpp"

namespace vtl {

enum class TargetMode { kJoint, kPerProperty, kSingle };

inline std::string target_mode_name(TargetMode m, std::size_t property) {
  switch (m) {
    case TargetMode::kJoint: return "all-joint";
    case TargetMode::kPerProperty: return "per-property";
    case TargetMode::kSingle: return std::string(kPropertyRegistry.at(property).acronym);
  }
  return "?";
}

/// Parses "all-joint", "per-property" or a property acronym.
inline std::pair<TargetMode, std::size_t> parse_target_mode(const std::string& s) {
  if (s == "all-joint" || s == "joint") return {TargetMode::kJoint, 0};
  if (s == "per-property") return {TargetMode::kPerProperty, 0};
  if (auto p = property_index(s)) return {TargetMode::kSingle, *p};
  throw InvalidArgument("unknown property target '" + s + "' (expected all-joint, per-property or an acronym)");
}

struct CrossModalConfig {
  TargetMode target_mode = TargetMode::kPerProperty;
  std::size_t single_property = 0;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-4;
  std::size_t latent_dim = 50;
  LossWeights weights;
  std::size_t clusters = 6;
  std::size_t pca_dims = 30;
  bool freeze_tactile_encoder = false;
  EncoderSpec encoder;
  std::uint64_t seed = 0;

  void validate() const {
    auto bad = [](const std::string& what) { throw InvalidArgument("training config: " + what); };
    if (epochs < 1) bad("epochs must be >= 1");
    if (batch_size < 1) bad("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
    if (latent_dim < 1) bad("latent_dim must be >= 1");
    if (clusters < 1) bad("k must be >= 1");
    if (pca_dims < 1) bad("pca_dims must be >= 1");
    if (single_property >= kNumProperties) bad("property index out of range");
    weights.validate();
  }

  nlohmann::json to_json() const {
    return {{"target", target_mode_name(target_mode, single_property)},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"latent_dim", latent_dim},
            {"lambda_emb", weights.embedding},
            {"lambda_adv", weights.adversarial},
            {"lambda_class", weights.classification},
            {"k", clusters},
            {"pca_dims", pca_dims},
            {"freeze_tactile_encoder", freeze_tactile_encoder},
            {"image_height", encoder.height},
            {"image_width", encoder.width},
            {"channels", encoder.channels},
            {"hidden", encoder.hidden},
            {"seed", seed}};
  }

  static CrossModalConfig from_json(const nlohmann::json& j) {
    CrossModalConfig c;
    std::tie(c.target_mode, c.single_property) = parse_target_mode(j.at("target").get<std::string>());
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.latent_dim = j.at("latent_dim").get<std::size_t>();
    c.weights = {j.at("lambda_emb").get<double>(), j.at("lambda_adv").get<double>(), j.at("lambda_class").get<double>()};
    c.clusters = j.at("k").get<std::size_t>();
    c.pca_dims = j.at("pca_dims").get<std::size_t>();
    c.freeze_tactile_encoder = j.at("freeze_tactile_encoder").get<bool>();
    c.encoder.height = j.at("image_height").get<std::size_t>();
    c.encoder.width = j.at("image_width").get<std::size_t>();
    c.encoder.channels = j.at("channels").get<std::array<std::size_t, 3>>();
    c.encoder.hidden = j.at("hidden").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  }

  std::vector<TargetSpec> targets() const {
    switch (target_mode) {
      case TargetMode::kJoint: return {TargetSpec::all()};
      case TargetMode::kSingle: return {TargetSpec::single(single_property)};
      case TargetMode::kPerProperty: break;
    }
    std::vector<TargetSpec> out;
    for (std::size_t p = 0; p < kNumProperties; ++p) out.push_back(TargetSpec::single(p));
    return out;
  }
};

/// Mean loss components over one epoch of one network.
struct EpochLog {
  std::size_t net = 0;
  std::size_t epoch = 0;
  double estimation = 0.0;
  double embedding = 0.0;
  double adversarial = 0.0;
  double classification = 0.0;
  double discriminator = 0.0;
  double total = 0.0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;

  std::string to_csv() const {
    std::ostringstream os;
    os << std::setprecision(9) << "net,epoch,estimation,embedding,adversarial,classification,discriminator,total\n";
    for (const auto& e : epochs)
      os << e.net << ',' << e.epoch << ',' << e.estimation << ',' << e.embedding << ',' << e.adversarial << ','
         << e.classification << ',' << e.discriminator << ',' << e.total << '\n';
    return os.str();
  }

  /// Estimation loss of epoch `epoch` averaged over networks.
  double mean_estimation(std::size_t epoch) const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& e : epochs)
      if (e.epoch == epoch) {
        s += e.estimation;
        ++n;
      }
    return n ? s / static_cast<double>(n) : 0.0;
  }
};

/// A trained single-image estimator: one network per target plus the
/// standardization and labeling state it was trained with.
class TactileEstimator {
 public:
  bool regression = false;
  CrossModalConfig config;
  Standardizer stats;
  std::vector<CrossModalModel<float>> nets;
  std::optional<PseudoLabeler> labeler;
  std::optional<FeatureExtractor> extractor;
  std::string data_hash;

  ModelSpec model_spec() const {
    ModelSpec s;
    s.encoder = config.encoder;
    s.latent_dim = config.latent_dim;
    s.classes = config.clusters;
    s.regression = regression;
    return s;
  }

  /// Raw [0,100] predictions. Properties without a network get the
  /// training mean.
  std::vector<TactileVector> predict(const ImageSet& set) {
    check_geometry(set.height, set.width);
    std::vector<TactileVector> out(set.size(), stats.mean);
    constexpr std::size_t chunk = 64;
    for (auto& net : nets) {
      for (std::size_t start = 0; start < set.size(); start += chunk) {
        std::vector<std::size_t> rows(std::min(chunk, set.size() - start));
        std::iota(rows.begin(), rows.end(), start);
        Graph<float> g;
        const auto& y = g.value(net.estimate(g, net.embed_visual(g, g.input(set.batch(rows)))));
        for (std::size_t b = 0; b < rows.size(); ++b)
          for (std::size_t j = 0; j < net.target.outputs(); ++j) out[start + b][net.target.index(j)] = y.at(b, j);
      }
    }
    return out;
  }

  MetricsReport evaluate(const ImageSet& set) {
    const auto pred = predict(set);
    return vtl::evaluate(set.targets, pred, stats.mean);
  }

  void check_geometry(std::size_t h, std::size_t w) const {
    if (h != config.encoder.height || w != config.encoder.width) {
      throw DataError("model expects " + std::to_string(config.encoder.height) + "x" +
                      std::to_string(config.encoder.width) + " images, dataset has " + std::to_string(h) + "x" +
                      std::to_string(w));
    }
  }

  Checkpoint to_checkpoint() {
    Checkpoint c;
    c.put_string("meta/kind", regression ? "regression" : "crossmodal");
    c.put_string("meta/config", config.to_json().dump());
    c.put_string("meta/property_acronyms", registry_string());
    c.put_string("meta/data_hash", data_hash);
    c.put("stats/mean", Tensor<float>({kNumProperties}, std::vector<float>(stats.mean.begin(), stats.mean.end())));
    c.put("stats/std", Tensor<float>({kNumProperties}, std::vector<float>(stats.std.begin(), stats.std.end())));
    for (std::size_t i = 0; i < nets.size(); ++i) {
      const std::string prefix = "net" + std::to_string(i) + "/";
      c.put_scalar(prefix + "target", nets[i].target.joint ? -1.0 : static_cast<double>(nets[i].target.property));
      c.put_params(prefix, nets[i].all_params());
    }
    if (labeler) labeler->save(c, "labeler/");
    if (extractor) c.put_params("labeler/", extractor->params());
    return c;
  }

  static TactileEstimator from_checkpoint(const Checkpoint& c) {
    TactileEstimator e;
    const std::string kind = c.get_string("meta/kind");
    if (kind != "regression" && kind != "crossmodal") throw DataError("checkpoint: unknown model kind '" + kind + "'");
    e.regression = kind == "regression";
    if (c.get_string("meta/property_acronyms") != registry_string()) {
      throw DataError("checkpoint: property order differs from the registry");
    }
    try {
      e.config = CrossModalConfig::from_json(nlohmann::json::parse(c.get_string("meta/config")));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(std::string("checkpoint: malformed config: ") + ex.what());
    }
    e.data_hash = c.get_string("meta/data_hash");
    const auto& mean = c.get("stats/mean");
    const auto& sd = c.get("stats/std");
    if (mean.size() != kNumProperties || sd.size() != kNumProperties) throw DataError("checkpoint: bad stats size");
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      e.stats.mean[p] = mean[p];
      e.stats.std[p] = sd[p];
    }
    const auto targets = e.config.targets();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string prefix = "net" + std::to_string(i) + "/";
      const double stored = c.get_scalar(prefix + "target");
      const double expected = targets[i].joint ? -1.0 : static_cast<double>(targets[i].property);
      if (stored != expected) throw DataError("checkpoint: target of network " + std::to_string(i) + " mismatches config");
      e.nets.emplace_back(e.model_spec(), targets[i], e.stats, 0);
      c.load_params(prefix, e.nets.back().all_params());
    }
    if (c.has("labeler/centroids")) {
      e.labeler = PseudoLabeler::load(c, "labeler/");
      e.extractor = FeatureExtractor(e.config.encoder, 0);
      c.load_params("labeler/", e.extractor->params());
    }
    return e;
  }

  static std::string registry_string() {
    std::string s;
    for (const auto& p : kPropertyRegistry) {
      if (!s.empty()) s += ',';
      s += p.acronym;
    }
    return s;
  }
};

struct TrainResult {
  TactileEstimator model;
  TrainingLog log;
  std::optional<PseudoLabels> pseudo_labels;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + batch)));
  return out;
}

/// Terms of the main objective for one batch; the discriminator enters as
/// a constant.
template <typename T>
struct MainObjective {
  LossTerms<T> terms;
  Var total;
};

template <typename T>
MainObjective<T> build_main_objective(Graph<T>& g, CrossModalModel<T>& net, const Tensor<T>& images,
                                      const std::vector<TactileVector>& targets, std::span<const int> labels,
                                      const LossWeights& w) {
  MainObjective<T> out;
  Var x = g.input(images);
  Var ev = net.embed_visual(g, x);
  Var pred = net.standardize_outputs(g, net.estimate(g, ev));
  Var y = g.input(net.standardized_targets(targets));
  out.terms.estimation = g.mse(pred, y);
  if (!net.is_regression()) {
    if (w.embedding != 0.0) {
      out.terms.embedding = loss_emb(g, ev, net.embed_tactile(g, g.input(net.standardize_tactile(targets))));
    }
    if (w.adversarial != 0.0) {
      auto dparams = net.disc_params();
      std::vector<bool> saved;
      for (auto* p : dparams) saved.push_back(p->trainable);
      set_trainable(dparams, false);
      Var f = net.disc_features(g, x);
      Var d_real = net.discriminate(g, f, y);
      Var d_fake = net.discriminate(g, f, pred);
      for (std::size_t i = 0; i < dparams.size(); ++i) dparams[i]->trainable = saved[i];
      out.terms.adversarial = loss_adversarial(g, d_real, d_fake, pred, y).gen;
    }
    if (w.classification != 0.0) out.terms.classification = loss_class(g, net.class_logits(g, ev), labels);
  }
  out.total = total_loss(g, out.terms, w);
  return out;
}

template <typename T>
Var build_disc_objective(Graph<T>& g, CrossModalModel<T>& net, const Tensor<T>& images,
                         const std::vector<TactileVector>& targets) {
  Var x = g.input(images);
  Var fake = g.stop_gradient(net.standardize_outputs(g, net.estimate(g, net.embed_visual(g, x))));
  Var y = g.input(net.standardized_targets(targets));
  Var f = net.disc_features(g, x);
  return loss_adversarial(g, net.discriminate(g, f, y), net.discriminate(g, f, fake), fake, y).disc;
}

inline void train_network(CrossModalModel<float>& net, std::size_t net_index, const ImageSet& train,
                          const std::vector<int>& labels, const CrossModalConfig& cfg, TrainingLog& log) {
  AdamOptions opt;
  opt.learning_rate = cfg.learning_rate;
  if (cfg.freeze_tactile_encoder && !net.is_regression()) {
    ParamList<float> et;
    net.et.collect(et);
    set_trainable(et, false);
  }
  Adam<float> main(net.main_params(), opt);
  Adam<float> disc(net.disc_params(), opt);
  const bool adversarial = !net.is_regression() && cfg.weights.adversarial != 0.0;
  const LossWeights w = net.is_regression() ? LossWeights{0, 0, 0} : cfg.weights;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(cfg.seed, {0xba7c, net_index, epoch});
    EpochLog e;
    e.net = net_index;
    e.epoch = epoch + 1;
    std::size_t seen = 0;
    try {
      for (const auto& rows : epoch_batches(train.size(), cfg.batch_size, rng)) {
        const Tensor<float> images = train.batch(rows);
        const auto targets = train.batch_targets(rows);
        std::vector<int> batch_labels;
        for (std::size_t r : rows) batch_labels.push_back(labels.empty() ? 0 : labels[r]);
        const double bw = static_cast<double>(rows.size());
        if (adversarial) {
          Graph<float> g;
          Var d_loss = build_disc_objective(g, net, images, targets);
          g.backward(d_loss);
          disc.step();
          disc.zero_grad();
          e.discriminator += bw * g.value(d_loss).item();
        }
        Graph<float> g;
        const auto obj = build_main_objective(g, net, images, targets, batch_labels, w);
        g.backward(obj.total);
        main.step();
        main.zero_grad();
        disc.zero_grad();
        e.estimation += bw * g.value(obj.terms.estimation).item();
        if (w.embedding != 0.0) e.embedding += bw * g.value(obj.terms.embedding).item();
        if (w.adversarial != 0.0) e.adversarial += bw * g.value(obj.terms.adversarial).item();
        if (w.classification != 0.0) e.classification += bw * g.value(obj.terms.classification).item();
        e.total += bw * g.value(obj.total).item();
        seen += rows.size();
      }
    } catch (const NumericError& err) {
      throw NumericError("training diverged (network " + std::to_string(net_index) + ", epoch " +
                         std::to_string(epoch + 1) + "): " + err.what());
    }
    const double n = static_cast<double>(seen);
    for (double* v : {&e.estimation, &e.embedding, &e.adversarial, &e.classification, &e.discriminator, &e.total})
      *v /= n;
    log.epochs.push_back(e);
  }
}

inline TrainResult train_impl(const ImageSet& train, CrossModalConfig cfg, bool regression) {
  cfg.validate();
  if (train.size() < 2) throw InvalidArgument("training needs at least 2 samples");
  cfg.encoder.height = train.height;
  cfg.encoder.width = train.width;
  TrainResult out;
  auto& model = out.model;
  model.regression = regression;
  model.config = cfg;
  model.stats = Standardizer::fit(train.targets);
  std::vector<int> labels;
  if (!regression && cfg.weights.classification != 0.0) {
    FeatureExtractor fx(cfg.encoder, derive_seed(cfg.seed, {0x1ab}));
    out.pseudo_labels = build_pseudo_labels(fx.extract(train), train.targets, cfg.pca_dims, cfg.clusters, cfg.seed);
    labels = out.pseudo_labels->labels;
    model.labeler = out.pseudo_labels->labeler;
    model.extractor = std::move(fx);
  }
  const auto targets = cfg.targets();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    model.nets.emplace_back(model.model_spec(), targets[i], model.stats, derive_seed(cfg.seed, {0x4e7, i}));
    train_network(model.nets.back(), i, train, labels, cfg, out.log);
  }
  return out;
}

}  // namespace detail

/// Cross-modal training: per batch a discriminator step, then a step on the
/// combined objective.
inline TrainResult train_cross_modal(const ImageSet& train, const CrossModalConfig& cfg) {
  return detail::train_impl(train, cfg, false);
}

/// Image encoder straight to the tactile output, trained on the estimation
/// loss alone.
inline TrainResult train_regression_baseline(const ImageSet& train, const CrossModalConfig& cfg) {
  return detail::train_impl(train, cfg, true);
}

}  // namespace vtl
