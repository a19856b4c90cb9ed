// albench: pool-based active-learning experiments with optional contrastive
// pre-training, driven by flat key=value config files.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "albench/experiment.hpp"

namespace {

void print_summary(const albench::RunSummary& s) {
  std::printf("%-18s pretrain=%-8s mean_acc=%.4f std=%.4f seeds=%zu\n", s.strategy_id.c_str(),
              s.pretrain_id.c_str(), s.mean_accuracy, s.std_accuracy, s.seeds.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pool-based active learning with contrastive pre-training"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seed_override;

  CLI::App* run = app.add_subcommand("run", "run one experiment config over its seeds");
  run->add_option("--config", config_path, "config file (flat key = value)")->required();
  run->add_option("--seed", seed_override, "override the config seed list (repeatable)");
  run->add_option("--out", out_dir, "output directory for CSV metrics");

  std::vector<std::string> config_paths;
  CLI::App* compare = app.add_subcommand("compare", "rank several configs on a shared benchmark");
  compare->add_option("--configs", config_paths, "config files sharing dataset/budget/seeds")
      ->required()
      ->expected(-1);
  compare->add_option("--out", out_dir, "output directory for CSV metrics");

  std::string axis;
  std::string values_csv;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sensitivity sweep over one config axis");
  sweep_cmd->add_option("--axis", axis,
                        "initial_fraction|cycles|epochs_per_cycle|budget_fraction|optimizer")
      ->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated axis values")->required();
  sweep_cmd->add_option("--config", config_path, "base config file")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory for CSV metrics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      albench::ExperimentConfig config = albench::parse_config_file(config_path);
      if (!seed_override.empty()) config.seeds = seed_override;
      albench::validate_config(config);
      const albench::RunSummary summary = albench::run_experiment(config, out_dir);
      print_summary(summary);
    } else if (compare->parsed()) {
      std::vector<albench::ExperimentConfig> configs;
      for (const std::string& p : config_paths) configs.push_back(albench::parse_config_file(p));
      const std::vector<albench::RunSummary> ranked =
          albench::compare_strategies(configs, out_dir);
      for (const albench::RunSummary& s : ranked) print_summary(s);
    } else if (sweep_cmd->parsed()) {
      const albench::ExperimentConfig base = albench::parse_config_file(config_path);
      std::vector<std::string> values;
      std::string item;
      std::stringstream ss(values_csv);
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(item);
      }
      const std::vector<albench::RunSummary> results =
          albench::sweep(axis, values, base, out_dir);
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::printf("%s=%s mean_acc=%.4f std=%.4f\n", axis.c_str(), values[i].c_str(),
                    results[i].mean_accuracy, results[i].std_accuracy);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
