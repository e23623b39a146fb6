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
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtl/common/checkpoint.hpp"
#include "vtl/crossmodal/train.hpp"
#include "vtl/viewselect/multiview.hpp"

namespace vtl {

enum class MultiViewMethod { kLateFusion, kViewPooling, kRandom, kEquidistant, kTrn, kNvs, kVbNvs };

inline std::string method_name(MultiViewMethod m) {
  switch (m) {
    case MultiViewMethod::kLateFusion: return "multi-late";
    case MultiViewMethod::kViewPooling: return "multi-viewpool";
    case MultiViewMethod::kRandom: return "multi-random";
    case MultiViewMethod::kEquidistant: return "multi-equidistant";
    case MultiViewMethod::kTrn: return "multi-trn";
    case MultiViewMethod::kNvs: return "nvs";
    case MultiViewMethod::kVbNvs: return "vbnvs";
  }
  return "?";
}

inline std::optional<MultiViewMethod> parse_multiview_method(const std::string& s) {
  for (auto m : {MultiViewMethod::kLateFusion, MultiViewMethod::kViewPooling, MultiViewMethod::kRandom,
                 MultiViewMethod::kEquidistant, MultiViewMethod::kTrn, MultiViewMethod::kNvs, MultiViewMethod::kVbNvs})
    if (method_name(m) == s) return m;
  return std::nullopt;
}

inline bool uses_selector(MultiViewMethod m) { return m == MultiViewMethod::kNvs || m == MultiViewMethod::kVbNvs; }

struct MultiViewConfig {
  MultiViewMethod method = MultiViewMethod::kNvs;
  TargetMode target_mode = TargetMode::kJoint;
  std::size_t single_property = 0;
  std::size_t views_to_select = 3;  ///< M
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-4;
  std::size_t latent_dim = 100;
  EncoderSpec encoder;
  std::uint64_t seed = 0;
  // Selector stage.
  double policy_lr = 0.05;
  std::size_t policy_iterations = 500;
  double baseline_decay = 0.9;
  double reward_pool_fraction = 0.2;
  std::size_t value_candidates = 256;
  std::size_t value_hidden = 64;
  double value_lr = 1e-3;
  // Multi-scale subsets.
  std::size_t trn_max_size = 3;
  std::size_t trn_eval_subsets = 8;

  void validate() const {
    auto bad = [](const std::string& what) { throw InvalidArgument("multi-view config: " + what); };
    if (views_to_select < 1) bad("M must be >= 1");
    if (epochs < 1) bad("epochs must be >= 1");
    if (batch_size < 1) bad("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
    if (latent_dim < 1) bad("latent_dim must be >= 1");
    if (single_property >= kNumProperties) bad("property index out of range");
    if (!(policy_lr > 0.0)) bad("policy_lr must be positive");
    if (uses_selector(method) && policy_iterations < 1) bad("policy_iterations must be >= 1");
    if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) bad("baseline_decay must lie in [0,1)");
    if (!(reward_pool_fraction > 0.0 && reward_pool_fraction < 1.0)) bad("reward_pool_fraction must lie in (0,1)");
    if (!(value_lr > 0.0)) bad("value_lr must be positive");
    if (method == MultiViewMethod::kTrn && (trn_max_size < 2 || trn_eval_subsets < 1)) {
      bad("TRN needs a maximum subset size >= 2 and at least one evaluation subset");
    }
  }

  nlohmann::json to_json() const {
    return {{"method", method_name(method)},
            {"target", target_mode_name(target_mode, single_property)},
            {"M", views_to_select},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"latent_dim", latent_dim},
            {"image_height", encoder.height},
            {"image_width", encoder.width},
            {"channels", encoder.channels},
            {"hidden", encoder.hidden},
            {"seed", seed},
            {"policy_lr", policy_lr},
            {"policy_iterations", policy_iterations},
            {"baseline_decay", baseline_decay},
            {"reward_pool_fraction", reward_pool_fraction},
            {"value_candidates", value_candidates},
            {"value_hidden", value_hidden},
            {"value_lr", value_lr},
            {"trn_max_size", trn_max_size},
            {"trn_eval_subsets", trn_eval_subsets}};
  }

  static MultiViewConfig from_json(const nlohmann::json& j) {
    MultiViewConfig c;
    const auto m = parse_multiview_method(j.at("method").get<std::string>());
    if (!m) throw InvalidArgument("unknown multi-view method '" + j.at("method").get<std::string>() + "'");
    c.method = *m;
    std::tie(c.target_mode, c.single_property) = parse_target_mode(j.at("target").get<std::string>());
    c.views_to_select = j.at("M").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.latent_dim = j.at("latent_dim").get<std::size_t>();
    c.encoder.height = j.at("image_height").get<std::size_t>();
    c.encoder.width = j.at("image_width").get<std::size_t>();
    c.encoder.channels = j.at("channels").get<std::array<std::size_t, 3>>();
    c.encoder.hidden = j.at("hidden").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.policy_lr = j.at("policy_lr").get<double>();
    c.policy_iterations = j.at("policy_iterations").get<std::size_t>();
    c.baseline_decay = j.at("baseline_decay").get<double>();
    c.reward_pool_fraction = j.at("reward_pool_fraction").get<double>();
    c.value_candidates = j.at("value_candidates").get<std::size_t>();
    c.value_hidden = j.at("value_hidden").get<std::size_t>();
    c.value_lr = j.at("value_lr").get<double>();
    c.trn_max_size = j.at("trn_max_size").get<std::size_t>();
    c.trn_eval_subsets = j.at("trn_eval_subsets").get<std::size_t>();
    return c;
  }

  std::vector<TargetSpec> targets() const {
    CrossModalConfig c;
    c.target_mode = target_mode;
    c.single_property = single_property;
    return c.targets();
  }

  /// Architecture for a dataset with `views` views.
  MultiViewSpec net_spec(std::size_t views) const {
    MultiViewSpec s;
    s.encoder = encoder;
    s.latent_dim = latent_dim;
    switch (method) {
      case MultiViewMethod::kLateFusion: s.head_sizes = {views}; break;
      case MultiViewMethod::kViewPooling:
        s.fusion = FusionMode::kMaxPool;
        s.head_sizes = {views};
        break;
      case MultiViewMethod::kTrn:
        s.head_sizes.clear();
        for (std::size_t k = 2; k <= trn_max_size; ++k) s.head_sizes.push_back(k);
        break;
      default: s.head_sizes = {views_to_select}; break;
    }
    return s;
  }
};

/// One stage-two iteration: the sampled views, the observed loss on the
/// reward pool and the baseline after the update.
struct SelectionLogRow {
  std::size_t iter = 0;
  ViewSet q;
  double loss = 0.0;
  double reward_baseline = 0.0;
};

struct SelectionLog {
  std::size_t selectors = 0;
  std::vector<SelectionLogRow> rows;

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "iter";
    for (std::size_t m = 0; m < selectors; ++m) os << ",q_" << m;
    os << ",loss,reward_baseline\n";
    for (const auto& r : rows) {
      os << r.iter;
      for (std::size_t v : r.q) os << ',' << v;
      os << ',' << r.loss << ',' << r.reward_baseline << '\n';
    }
    return os.str();
  }
};

/// Outcome of the selector stage for one network.
struct SelectionResult {
  ViewSet q_star;
  SelectorBank bank;
  SelectionLog log;
  std::optional<ValueNetwork> value;
  std::vector<double> value_losses;  ///< value-network fit loss per iteration
};

namespace detail {

/// Views used for a batch during training.
using ViewSchedule = std::function<ViewSet(std::size_t epoch, std::size_t batch, Rng& rng)>;

inline Var multiview_loss(Graph<float>& g, MultiViewNet<float>& net, const MultiViewSet& set,
                          std::span<const std::size_t> rows, std::span<const std::size_t> q) {
  std::vector<Var> views;
  for (std::size_t v : q) views.push_back(g.input(set.batch(rows, v)));
  Var pred = net.standardize_outputs(g, net.forward(g, views));
  return g.mse(pred, g.input(net.standardized_targets(set.batch_targets(rows))));
}

/// Mean estimation loss per epoch.
inline std::vector<double> train_multiview_net(MultiViewNet<float>& net, const MultiViewSet& set,
                                               std::span<const std::size_t> rows, const ViewSchedule& schedule,
                                               const MultiViewConfig& cfg, std::uint64_t stream) {
  AdamOptions opt;
  opt.learning_rate = cfg.learning_rate;
  Adam<float> adam(net.all_params(), opt);
  std::vector<double> history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = make_rng(cfg.seed, {0x5a7e, stream, epoch});
    double total = 0.0;
    std::size_t seen = 0, index = 0;
    try {
      for (const auto& local : epoch_batches(rows.size(), cfg.batch_size, rng)) {
        std::vector<std::size_t> batch;
        for (std::size_t r : local) batch.push_back(rows[r]);
        const ViewSet q = schedule(epoch, index++, rng);
        Graph<float> g;
        Var loss = multiview_loss(g, net, set, batch, q);
        g.backward(loss);
        adam.step();
        adam.zero_grad();
        total += g.value(loss).item() * static_cast<double>(batch.size());
        seen += batch.size();
      }
    } catch (const NumericError& e) {
      throw NumericError("multi-view training diverged (epoch " + std::to_string(epoch + 1) + "): " + e.what());
    }
    history.push_back(total / static_cast<double>(seen));
  }
  return history;
}

/// Standardized MSE of the head on cached features.
inline Var cached_loss(Graph<float>& g, MultiViewNet<float>& net, const FeatureCache& cache,
                       const MultiViewSet& set, std::span<const std::size_t> rows, std::span<const std::size_t> q) {
  std::vector<Var> features;
  for (std::size_t v : q) features.push_back(g.input(cache.view_batch(rows, v)));
  Var pred = net.standardize_outputs(g, net.head(g, net.fuse(g, features), q.size()));
  return g.mse(pred, g.input(net.standardized_targets(set.batch_targets(rows))));
}

/// Deterministic split of `n` rows into (fit, reward pool).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> reward_split(std::size_t n, double fraction,
                                                                                  std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, {0x9001});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t pool =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::round(fraction * static_cast<double>(n))), 1, n - 1);
  std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(pool), order.end());
  std::vector<std::size_t> reward(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool));
  std::sort(fit.begin(), fit.end());
  std::sort(reward.begin(), reward.end());
  return {fit, reward};
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

inline ViewSet all_views(std::size_t n) { return all_rows(n); }

}  // namespace detail

/// Stages one and two for one target: train an estimator on random view
/// combinations, then freeze its encoder and learn the selector bank by
/// REINFORCE against the held-out estimation loss. The fusion head keeps
/// training on the sampled views.
inline SelectionResult run_selection(const MultiViewSet& train, const MultiViewConfig& cfg, const TargetSpec& target,
                                     std::size_t net_index, MultiViewNet<float>* stage1_out = nullptr) {
  cfg.validate();
  if (!uses_selector(cfg.method)) throw InvalidArgument("view selection needs method nvs or vbnvs");
  if (train.size() < 4) throw InvalidArgument("view selection needs at least 4 training samples");
  const std::size_t n = train.views, m = cfg.views_to_select;
  MultiViewConfig c = cfg;
  c.encoder.height = train.height;
  c.encoder.width = train.width;
  const Standardizer stats = Standardizer::fit(train.targets);
  const auto [fit_rows, pool_rows] = detail::reward_split(train.size(), c.reward_pool_fraction, c.seed);

  MultiViewNet<float> net(c.net_spec(n), target, stats, derive_seed(c.seed, {0x51, net_index}));
  detail::train_multiview_net(
      net, train, fit_rows, [n, m](std::size_t, std::size_t, Rng& rng) { return sample_random(n, m, rng); }, c,
      derive_seed(c.seed, {0x51a, net_index}));
  if (stage1_out) *stage1_out = net;

  const FeatureCache cache = FeatureCache::build(net, train);
  AdamOptions opt;
  opt.learning_rate = c.learning_rate;
  Adam<float> head_opt(net.head_params(), opt);

  SelectionResult out;
  out.bank = SelectorBank(m, n);
  out.log.selectors = m;
  RewardBaseline baseline{c.baseline_decay};
  const bool value_based = c.method == MultiViewMethod::kVbNvs;
  std::vector<std::vector<double>> replay_inputs;
  std::vector<double> replay_losses;
  std::optional<Adam<double>> value_opt;
  if (value_based) {
    out.value.emplace(m, n, c.value_hidden, derive_seed(c.seed, {0x7a, net_index}));
    AdamOptions vo;
    vo.learning_rate = c.value_lr;
    value_opt.emplace(out.value->params(), vo);
  }

  Rng rng = make_rng(c.seed, {0x2b, net_index});
  for (std::size_t it = 0; it < c.policy_iterations; ++it) {
    const ViewSet q = select_stochastic(out.bank, rng);
    double loss = 0.0;
    {
      Graph<float> g;
      loss = g.value(detail::cached_loss(g, net, cache, train, pool_rows, q)).item();
    }
    if (!std::isfinite(loss)) throw NumericError("view selection: non-finite loss at iteration " + std::to_string(it));
    const double reward = -loss;
    reinforce_update(out.bank, q, reward, baseline.started ? baseline.value : reward, c.policy_lr);
    baseline.update(reward);
    out.log.rows.push_back({it, q, loss, baseline.value});

    std::vector<std::size_t> batch(std::min(c.batch_size, fit_rows.size()));
    std::sample(fit_rows.begin(), fit_rows.end(), batch.begin(), static_cast<std::ptrdiff_t>(batch.size()), rng);
    {
      Graph<float> g;
      g.backward(detail::cached_loss(g, net, cache, train, batch, q));
      head_opt.step();
      head_opt.zero_grad();
    }

    if (value_based) {
      replay_inputs.push_back(one_hot_selection(q, n));
      replay_losses.push_back(loss);
      const std::size_t k = std::min<std::size_t>(32, replay_inputs.size());
      std::vector<std::size_t> pick(replay_inputs.size());
      std::iota(pick.begin(), pick.end(), 0);
      std::shuffle(pick.begin(), pick.end(), rng);
      std::vector<std::vector<double>> xs;
      std::vector<double> ys;
      for (std::size_t i = 0; i < k; ++i) {
        xs.push_back(replay_inputs[pick[i]]);
        ys.push_back(replay_losses[pick[i]]);
      }
      out.value_losses.push_back(out.value->fit_step(xs, ys, *value_opt));
    }
  }

  if (!value_based) {
    out.q_star = select_deterministic(out.bank);
    return out;
  }
  // Candidate pool: the deterministic pick first, then stochastic draws.
  std::vector<ViewSet> candidates{select_deterministic(out.bank)};
  for (std::size_t i = 0; i < c.value_candidates; ++i) candidates.push_back(select_stochastic(out.bank, rng));
  std::vector<std::vector<double>> inputs;
  for (const auto& q : candidates) inputs.push_back(one_hot_selection(q, n));
  const auto predicted = out.value->predict(inputs);
  out.q_star = candidates[static_cast<std::size_t>(std::min_element(predicted.begin(), predicted.end()) -
                                                   predicted.begin())];
  return out;
}

/// A trained multi-view estimator: one network per target with the views
/// it reads.
class MultiViewModel {
 public:
  MultiViewConfig config;
  Standardizer stats;
  std::size_t views = 0;
  std::vector<MultiViewNet<float>> nets;
  std::vector<ViewSet> selections;  ///< per network; empty for the subset method
  std::string data_hash;

  void check_geometry(const MultiViewSet& set) const {
    if (set.height != config.encoder.height || set.width != config.encoder.width || set.views != views) {
      throw DataError("model expects " + std::to_string(views) + " views of " + std::to_string(config.encoder.height) +
                      "x" + std::to_string(config.encoder.width) + ", dataset has " + std::to_string(set.views) +
                      " views of " + std::to_string(set.height) + "x" + std::to_string(set.width));
    }
  }

  /// Subsets averaged at evaluation for the multi-scale method.
  std::vector<ViewSet> evaluation_subsets(std::size_t net_index) const {
    Rng rng = make_rng(config.seed, {0x7e5, net_index});
    return sample_trn_subsets(views, config.trn_max_size, config.trn_eval_subsets, rng);
  }

  std::vector<TactileVector> predict(const MultiViewSet& set) {
    check_geometry(set);
    std::vector<TactileVector> out(set.size(), stats.mean);
    constexpr std::size_t chunk = 64;
    for (std::size_t i = 0; i < nets.size(); ++i) {
      auto& net = nets[i];
      const std::vector<ViewSet> subsets =
          config.method == MultiViewMethod::kTrn ? evaluation_subsets(i) : std::vector<ViewSet>{selections[i]};
      for (std::size_t start = 0; start < set.size(); start += chunk) {
        std::vector<std::size_t> rows(std::min(chunk, set.size() - start));
        std::iota(rows.begin(), rows.end(), start);
        std::vector<double> acc(rows.size() * net.target.outputs(), 0.0);
        for (const auto& q : subsets) {
          Graph<float> g;
          std::vector<Var> vs;
          for (std::size_t v : q) vs.push_back(g.input(set.batch(rows, v)));
          const auto& y = g.value(net.forward(g, vs));
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += y[k] / static_cast<double>(subsets.size());
        }
        for (std::size_t b = 0; b < rows.size(); ++b)
          for (std::size_t j = 0; j < net.target.outputs(); ++j)
            out[start + b][net.target.index(j)] = acc[b * net.target.outputs() + j];
      }
    }
    return out;
  }

  MetricsReport evaluate(const MultiViewSet& set) { return vtl::evaluate(set.targets, predict(set), stats.mean); }

  Checkpoint to_checkpoint() {
    Checkpoint c;
    c.put_string("meta/kind", "multiview");
    c.put_string("meta/config", config.to_json().dump());
    c.put_string("meta/property_acronyms", TactileEstimator::registry_string());
    c.put_string("meta/data_hash", data_hash);
    c.put_scalar("meta/views", static_cast<double>(views));
    c.put("stats/mean", Tensor<float>({kNumProperties}, std::vector<float>(stats.mean.begin(), stats.mean.end())));
    c.put("stats/std", Tensor<float>({kNumProperties}, std::vector<float>(stats.std.begin(), stats.std.end())));
    for (std::size_t i = 0; i < nets.size(); ++i) {
      const std::string prefix = "net" + std::to_string(i) + "/";
      c.put_scalar(prefix + "target", nets[i].target.joint ? -1.0 : static_cast<double>(nets[i].target.property));
      if (!selections[i].empty()) {
        c.put(prefix + "views", Tensor<float>({selections[i].size()},
                                              std::vector<float>(selections[i].begin(), selections[i].end())));
      }
      c.put_params(prefix, nets[i].all_params());
    }
    return c;
  }

  static MultiViewModel from_checkpoint(const Checkpoint& c) {
    MultiViewModel mv;
    if (c.get_string("meta/kind") != "multiview") {
      throw DataError("checkpoint: expected a multi-view model, found '" + c.get_string("meta/kind") + "'");
    }
    if (c.get_string("meta/property_acronyms") != TactileEstimator::registry_string()) {
      throw DataError("checkpoint: property order differs from the registry");
    }
    try {
      mv.config = MultiViewConfig::from_json(nlohmann::json::parse(c.get_string("meta/config")));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(std::string("checkpoint: malformed config: ") + ex.what());
    }
    mv.data_hash = c.get_string("meta/data_hash");
    mv.views = static_cast<std::size_t>(c.get_scalar("meta/views"));
    const auto& mean = c.get("stats/mean");
    const auto& sd = c.get("stats/std");
    if (mean.size() != kNumProperties || sd.size() != kNumProperties) throw DataError("checkpoint: bad stats size");
    for (std::size_t p = 0; p < kNumProperties; ++p) {
      mv.stats.mean[p] = mean[p];
      mv.stats.std[p] = sd[p];
    }
    const auto targets = mv.config.targets();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string prefix = "net" + std::to_string(i) + "/";
      const double expected = targets[i].joint ? -1.0 : static_cast<double>(targets[i].property);
      if (c.get_scalar(prefix + "target") != expected) {
        throw DataError("checkpoint: target of network " + std::to_string(i) + " mismatches config");
      }
      ViewSet q;
      if (c.has(prefix + "views")) {
        for (float v : c.get(prefix + "views").data()) {
          if (!(v >= 0.0f) || static_cast<std::size_t>(v) >= mv.views) throw DataError("checkpoint: bad view index");
          q.push_back(static_cast<std::size_t>(v));
        }
      }
      mv.selections.push_back(std::move(q));
      mv.nets.emplace_back(mv.config.net_spec(mv.views), targets[i], mv.stats, 0);
      c.load_params(prefix, mv.nets.back().all_params());
    }
    return mv;
  }
};

struct MultiViewTrainResult {
  MultiViewModel model;
  std::vector<std::vector<double>> loss_history;  ///< per network, per epoch
  std::vector<SelectionResult> selection;         ///< per network, selector methods only
  std::vector<MultiViewNet<float>> stage1;        ///< per network, selector methods only
};

/// Trains every target network for the configured method.
inline MultiViewTrainResult train_multiview(const MultiViewSet& train, const MultiViewConfig& cfg) {
  cfg.validate();
  if (train.size() < 2) throw InvalidArgument("training needs at least 2 samples");
  MultiViewConfig c = cfg;
  c.encoder.height = train.height;
  c.encoder.width = train.width;
  const std::size_t n = train.views, m = c.views_to_select;
  if (c.method == MultiViewMethod::kTrn && c.trn_max_size > n) {
    throw InvalidArgument("TRN subsets of size " + std::to_string(c.trn_max_size) + " need at least that many views");
  }
  MultiViewTrainResult out;
  auto& model = out.model;
  model.config = c;
  model.views = n;
  model.stats = Standardizer::fit(train.targets);
  const auto rows = detail::all_rows(train.size());
  const auto targets = c.targets();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ViewSet q;
    detail::ViewSchedule schedule;
    switch (c.method) {
      case MultiViewMethod::kLateFusion:
      case MultiViewMethod::kViewPooling: q = detail::all_views(n); break;
      case MultiViewMethod::kRandom: {
        Rng rng = make_rng(c.seed, {0x4a, i});
        q = sample_random(n, m, rng);
        break;
      }
      case MultiViewMethod::kEquidistant: q = sample_equidistant(n, m); break;
      case MultiViewMethod::kTrn:
        schedule = [n, k = c.trn_max_size](std::size_t, std::size_t, Rng& rng) { return sample_trn_subset(n, k, rng); };
        break;
      case MultiViewMethod::kNvs:
      case MultiViewMethod::kVbNvs: {
        MultiViewNet<float> stage1;
        out.selection.push_back(run_selection(train, c, targets[i], i, &stage1));
        out.stage1.push_back(std::move(stage1));
        q = out.selection.back().q_star;
        break;
      }
    }
    if (!schedule) schedule = [q](std::size_t, std::size_t, Rng&) { return q; };
    model.nets.emplace_back(c.net_spec(n), targets[i], model.stats, derive_seed(c.seed, {0x53, i}));
    out.loss_history.push_back(
        detail::train_multiview_net(model.nets.back(), train, rows, schedule, c, derive_seed(c.seed, {0x53a, i})));
    model.selections.push_back(q);
  }
  return out;
}

}  // namespace vtl
