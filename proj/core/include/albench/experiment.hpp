#pragma once

#include <string>
#include <vector>

#include "albench/config.hpp"
#include "albench/partition.hpp"

namespace albench {

/// Per-cycle measurements of one seeded run.
struct CycleRecord {
  std::size_t cycle = 0;
  std::size_t labeled_count = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  // Indices whose annotation opened this cycle (the initial random sample
  // for cycle 1, the previous cycle's selection otherwise).
  std::vector<std::size_t> selected_indices;
  double wall_time_s = 0.0;
};

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::vector<CycleRecord> cycles;
  double final_accuracy = 0.0;
  std::size_t oracle_queries = 0;
};

struct RunSummary {
  std::string config_hash;
  std::string strategy_id;
  std::string pretrain_id;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_accuracies;  // seed order
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation over seeds
  std::vector<SeedRunResult> runs;
};

/// Argmax-prediction accuracy on the eval split, argmax ties broken by
/// lowest class index.
double evaluate(const ProbabilisticClassifier& model, const EvalSet& eval);

/// Runs the full two-step protocol for every seed: optional self-supervised
/// pretraining on the whole pool, the initial random sample, then the
/// train/select/annotate cycle loop with retraining from initialization each
/// cycle. When out_dir is nonempty, writes cycles_<seed>.csv and summary.csv
/// (plus per-seed score dumps when enabled), all atomically.
RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// Runs each config (which must share dataset, budget arithmetic and seeds)
/// and writes a combined summary.csv ordered best mean first.
std::vector<RunSummary> compare_strategies(const std::vector<ExperimentConfig>& configs,
                                           const std::string& out_dir);

/// One run_experiment per axis value; all values are validated before any
/// run starts. Writes sweep.csv with `axis_value,mean,std`.
std::vector<RunSummary> sweep(const std::string& axis, const std::vector<std::string>& values,
                              const ExperimentConfig& base, const std::string& out_dir);

/// Loads the configured dataset for one seed (synthetic pools are seeded;
/// fer2013 is identical across seeds with the configured eval split).
Dataset load_dataset(const ExperimentConfig& config, std::uint64_t seed);

/// Budget resolution: n = round(budget_fraction * N), s = round(
/// initial_fraction * N), both clamped to valid ranges.
BudgetLedger make_ledger(const ExperimentConfig& config, std::size_t pool_size);

}  // namespace albench
