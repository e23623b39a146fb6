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
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtl/common/binary_io.hpp"
#include "vtl/crossmodal/train.hpp"
#include "vtl/viewselect/train.hpp"

namespace vtl {

using KeyValues = std::map<std::string, std::string>;

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitInternal = 1;

/// Process exit code for an exception escaping a command.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InvalidArgument*>(&e)) return kExitUsage;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return kExitData;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitInternal;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Parses `key = value` lines. '#' starts a comment; blank lines are
/// skipped. A repeated key is an error.
inline KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw UsageError(where + ": empty key");
    if (!out.emplace(key, value).second) throw UsageError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

inline KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

/// Values from `overrides` replace those in `base`.
inline KeyValues merge_key_values(KeyValues base, const KeyValues& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

namespace detail {

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw UsageError("'" + key + "': cannot parse '" + value + "' as a number");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("'" + key + "': expected true or false, got '" + value + "'");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::uint64_t>(key, trim(item)));
  if (out.empty()) throw UsageError("'" + key + "': empty seed list");
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes{"regression",        "crossmodal", "multi-late", "multi-viewpool",
                                              "multi-random",      "multi-equidistant", "multi-trn", "nvs",
                                              "vbnvs"};
  return modes;
}

inline bool is_multiview_mode(const std::string& mode) { return parse_multiview_method(mode).has_value(); }

/// Everything needed to rerun an experiment. Every field is echoed into
/// the report.
struct ExperimentConfig {
  std::string dataset;  ///< dataset directory, or "preset:<name>" for an in-memory dataset
  std::string mode = "crossmodal";
  std::string target;  ///< empty: per-property for single-image, all-joint for multi-view
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-4;
  std::optional<std::size_t> latent_dim;
  std::optional<std::size_t> views_to_select;
  double lambda_emb = 1.0;
  double lambda_adv = 0.1;
  double lambda_class = 0.1;
  std::size_t k = 6;
  std::size_t pca_dims = 30;
  bool freeze_tactile_encoder = false;
  double policy_lr = 0.05;
  std::size_t policy_iterations = 500;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string output = "runs";
  std::uint64_t data_seed = 0;  ///< generator seed when `dataset` names a preset

  static ExperimentConfig from_key_values(const KeyValues& kv) {
    ExperimentConfig c;
    for (const auto& [key, value] : kv) {
      using detail::parse_number;
      if (key == "dataset") c.dataset = value;
      else if (key == "mode") c.mode = value;
      else if (key == "target") c.target = value;
      else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
      else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
      else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
      else if (key == "latent_dim") c.latent_dim = parse_number<std::size_t>(key, value);
      else if (key == "M") c.views_to_select = parse_number<std::size_t>(key, value);
      else if (key == "lambda_emb") c.lambda_emb = parse_number<double>(key, value);
      else if (key == "lambda_adv") c.lambda_adv = parse_number<double>(key, value);
      else if (key == "lambda_class") c.lambda_class = parse_number<double>(key, value);
      else if (key == "k") c.k = parse_number<std::size_t>(key, value);
      else if (key == "pca_dims") c.pca_dims = parse_number<std::size_t>(key, value);
      else if (key == "freeze_tactile_encoder") c.freeze_tactile_encoder = detail::parse_bool(key, value);
      else if (key == "policy_lr") c.policy_lr = parse_number<double>(key, value);
      else if (key == "policy_iterations") c.policy_iterations = parse_number<std::size_t>(key, value);
      else if (key == "seeds") c.seeds = detail::parse_seed_list(key, value);
      else if (key == "output") c.output = value;
      else if (key == "data_seed") c.data_seed = parse_number<std::uint64_t>(key, value);
      else throw UsageError("unknown config key '" + key + "'");
    }
    c.validate();
    return c;
  }

  bool multiview() const { return is_multiview_mode(mode); }

  std::string effective_target() const {
    if (!target.empty()) return target;
    return multiview() ? "all-joint" : "per-property";
  }

  std::size_t effective_latent() const { return latent_dim.value_or(multiview() ? 100 : 50); }

  void validate() const {
    if (std::find(experiment_modes().begin(), experiment_modes().end(), mode) == experiment_modes().end()) {
      throw UsageError("unknown mode '" + mode + "'");
    }
    if (!multiview() && views_to_select) throw UsageError("M applies only to multi-view modes, not '" + mode + "'");
    if (seeds.empty()) throw UsageError("at least one seed is required");
    try {
      (void)parse_target_mode(effective_target());
      if (multiview()) {
        multiview_config(seeds.front()).validate();
      } else {
        crossmodal_config(seeds.front()).validate();
      }
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }

  CrossModalConfig crossmodal_config(std::uint64_t seed) const {
    CrossModalConfig c;
    std::tie(c.target_mode, c.single_property) = parse_target_mode(effective_target());
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.learning_rate = learning_rate;
    c.latent_dim = effective_latent();
    c.weights = {lambda_emb, lambda_adv, lambda_class};
    c.clusters = k;
    c.pca_dims = pca_dims;
    c.freeze_tactile_encoder = freeze_tactile_encoder;
    c.seed = seed;
    return c;
  }

  MultiViewConfig multiview_config(std::uint64_t seed) const {
    MultiViewConfig c;
    c.method = *parse_multiview_method(mode);
    std::tie(c.target_mode, c.single_property) = parse_target_mode(effective_target());
    c.views_to_select = views_to_select.value_or(3);
    c.trn_max_size = c.views_to_select;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.learning_rate = learning_rate;
    c.latent_dim = effective_latent();
    c.policy_lr = policy_lr;
    c.policy_iterations = policy_iterations;
    c.seed = seed;
    return c;
  }

  nlohmann::json to_json() const {
    return {{"dataset", dataset},
            {"mode", mode},
            {"target", effective_target()},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"latent_dim", effective_latent()},
            {"M", multiview() ? nlohmann::json(views_to_select.value_or(3)) : nlohmann::json(nullptr)},
            {"lambda_emb", lambda_emb},
            {"lambda_adv", lambda_adv},
            {"lambda_class", lambda_class},
            {"k", k},
            {"pca_dims", pca_dims},
            {"freeze_tactile_encoder", freeze_tactile_encoder},
            {"policy_lr", policy_lr},
            {"policy_iterations", policy_iterations},
            {"seeds", seeds},
            {"output", output},
            {"data_seed", data_seed}};
  }

  /// Fingerprint of the settings that affect results (the output location
  /// is excluded).
  std::string hash() const {
    nlohmann::json j = to_json();
    j.erase("output");
    return hex64(fnv1a64(j.dump()));
  }
};

}  // namespace vtl
