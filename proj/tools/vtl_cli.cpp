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

// Command-line front end: gen-data, train, eval, select-views, report.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtl/harness/config.hpp"
#include "vtl/harness/experiment.hpp"
#include "vtl/harness/report.hpp"
#include "vtl/synthsps/dataset.hpp"
#include "vtl/synthsps/generator.hpp"

namespace {

/// Flags shared by train and select-views. Each maps onto a config key;
/// only flags actually given override the config file.
struct ExperimentFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::string seed;
  bool freeze = false;
  CLI::Option* freeze_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    const std::vector<std::tuple<std::string, std::string, std::string>> flags{
        {"--dataset", "dataset", "dataset directory or preset:<name>"},
        {"--mode", "mode", "regression, crossmodal, multi-late, multi-viewpool, multi-random, multi-equidistant, "
                           "multi-trn, nvs or vbnvs"},
        {"--target", "target", "all-joint, per-property or a property acronym"},
        {"--epochs", "epochs", "training epochs"},
        {"--batch-size", "batch_size", "mini-batch size"},
        {"--lr", "learning_rate", "learning rate"},
        {"--latent", "latent_dim", "latent dimension"},
        {"--M", "M", "views to select (multi-view modes)"},
        {"--lambda-emb", "lambda_emb", "embedding loss weight"},
        {"--lambda-adv", "lambda_adv", "adversarial loss weight"},
        {"--lambda-class", "lambda_class", "classification loss weight"},
        {"--k", "k", "pseudo-label clusters"},
        {"--pca-dims", "pca_dims", "PCA dimensions before clustering"},
        {"--policy-lr", "policy_lr", "selector learning rate"},
        {"--policy-iterations", "policy_iterations", "selector updates"},
        {"--seeds", "seeds", "comma-separated seed list"},
        {"--output", "output", "root directory for run directories"},
        {"--data-seed", "data_seed", "generator seed for preset datasets"},
    };
    for (const auto& [flag, key, help] : flags) options.emplace_back(key, cmd.add_option(flag, values[key], help));
    seed_opt = cmd.add_option("--seed", seed, "run a single seed");
    freeze_opt = cmd.add_flag("--freeze-tactile-encoder", freeze, "keep the tactile encoder fixed");
  }

  vtl::ExperimentConfig resolve() const {
    vtl::KeyValues file = config_file.empty() ? vtl::KeyValues{} : vtl::load_key_values(config_file);
    vtl::KeyValues flags;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) flags[key] = values.at(key);
    if (seed_opt->count() > 0) {
      if (flags.count("seeds")) throw vtl::UsageError("--seed and --seeds are mutually exclusive");
      flags["seeds"] = seed;
    }
    if (freeze_opt->count() > 0) flags["freeze_tactile_encoder"] = freeze ? "true" : "false";
    return vtl::ExperimentConfig::from_key_values(vtl::merge_key_values(std::move(file), flags));
  }
};

void print_metrics(const vtl::MetricsReport& m) {
  std::cout << "mean R2 " << m.mean_r_squared << "  MAE " << m.mean_mae << "  %err " << m.mean_pct_err
            << "  %err_top8 " << m.top8_pct_err << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual-tactile property estimation experiments"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset directory");
  std::string preset = "desk", gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t samples = 0, views = 0, size = 0;
  gen->add_option("--preset", preset, "desk, full or smoke")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output directory")->required();
  auto* samples_opt = gen->add_option("--samples", samples, "override the sample count");
  auto* views_opt = gen->add_option("--views", views, "override the views per sample");
  auto* size_opt = gen->add_option("--size", size, "override the image side length");

  auto* train = app.add_subcommand("train", "train and evaluate every seed");
  ExperimentFlags train_flags;
  train_flags.attach(*train);

  auto* select = app.add_subcommand("select-views", "run view selection only and record q*");
  ExperimentFlags select_flags;
  select_flags.attach(*select);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's validation split");
  std::string ckpt_path, eval_dataset, eval_out;
  std::uint64_t eval_data_seed = 0;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--dataset", eval_dataset, "dataset directory or preset:<name>")->required();
  eval->add_option("--data-seed", eval_data_seed, "generator seed for preset datasets");
  eval->add_option("--out", eval_out, "write the metrics JSON here as well");

  auto* report = app.add_subcommand("report", "compare experiment reports");
  std::vector<std::string> report_paths, report_names;
  std::string report_out;
  report->add_option("reports", report_paths, "report.json files")->required();
  report->add_option("--name", report_names, "row label per report, in order");
  report->add_option("--out", report_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? vtl::kExitSuccess : vtl::kExitUsage;
  }

  try {
    if (*gen) {
      vtl::GenConfig g;
      try {
        g = vtl::preset_by_name(preset);
      } catch (const vtl::InvalidArgument& e) {
        throw vtl::UsageError(e.what());
      }
      if (samples_opt->count()) g.num_samples = samples;
      if (views_opt->count()) g.views = views;
      if (size_opt->count()) g.height = g.width = size;
      const auto m = vtl::generate_dataset(g, gen_seed, gen_out);
      std::cout << "wrote " << m.num_samples << " samples x " << m.views << " views (" << m.height << "x" << m.width
                << ") to " << gen_out << "  config_hash " << m.config_hash() << '\n';
    } else if (*train) {
      const auto r = vtl::run_train(train_flags.resolve(), &std::cerr);
      std::cout << "report " << r.artifacts.back() << '\n';
      print_metrics(r.mean);
    } else if (*select) {
      const auto r = vtl::run_select_views(select_flags.resolve(), &std::cerr);
      for (std::size_t i = 0; i < r.seeds.size(); ++i) {
        std::cout << "seed " << r.seeds[i] << ":";
        for (const auto& q : r.q_star[i]) {
          std::cout << " [";
          for (std::size_t k = 0; k < q.size(); ++k) std::cout << (k ? "," : "") << q[k];
          std::cout << "]";
        }
        std::cout << '\n';
      }
    } else if (*eval) {
      vtl::ExperimentConfig dcfg;
      dcfg.dataset = eval_dataset;
      dcfg.data_seed = eval_data_seed;
      const auto result = vtl::run_eval(ckpt_path, vtl::open_dataset(dcfg));
      const std::string json = result.to_json().dump(2) + "\n";
      if (!eval_out.empty()) vtl::write_text(eval_out, json);
      std::cout << json;
    } else if (*report) {
      if (!report_names.empty() && report_names.size() != report_paths.size()) {
        throw vtl::UsageError("--name must be given once per report or not at all");
      }
      std::vector<vtl::NamedReport> rows;
      for (std::size_t i = 0; i < report_paths.size(); ++i) {
        const auto r = vtl::ExperimentReport::load(report_paths[i]);
        rows.push_back({report_names.empty() ? r.label() : report_names[i], r.config_hash, r.mean});
      }
      const auto [r2, pct] = vtl::run_report(rows, report_out);
      std::cout << r2.to_csv() << '\n' << pct.to_csv();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vtl::exit_code_for(e);
  }
  return vtl::kExitSuccess;
}
