#include "albench/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "albench/checkpoint.hpp"
#include "albench/fer2013.hpp"

namespace albench {

namespace {

namespace fs = std::filesystem;

// Substream keys for the per-seed rng tree.
constexpr std::uint64_t kDataKey = 1;
constexpr std::uint64_t kModelInitKey = 2;
constexpr std::uint64_t kPretrainKey = 3;
constexpr std::uint64_t kInitialSampleKey = 4;
constexpr std::uint64_t kTrainKey = 5;
constexpr std::uint64_t kSelectKey = 6;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << contents;
  }
  fs::rename(tmp, path);
}

EncoderSpec encoder_spec_for(const ExperimentConfig& config, const SamplePool& pool) {
  EncoderSpec spec;
  spec.input_dim = pool.dims();
  spec.activation = config.activation == "tanh" ? Activation::kTanh : Activation::kRelu;
  if (config.model == "linear") {
    spec.kind = EncoderSpec::Kind::kIdentity;
  } else if (config.model == "mlp") {
    spec.kind = EncoderSpec::Kind::kMlp;
    spec.hidden = config.hidden_dims;
  } else if (config.model == "conv") {
    if (pool.image_height == 0 || pool.image_width == 0) {
      throw std::invalid_argument("config: model conv requires image-shaped data");
    }
    spec.kind = EncoderSpec::Kind::kConv;
    spec.image_height = pool.image_height;
    spec.image_width = pool.image_width;
    spec.embedding_dim = config.embedding_dim;
  } else {
    throw std::invalid_argument("config: unknown model '" + config.model + "'");
  }
  return spec;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

std::string cycles_csv_text(const SeedRunResult& run, bool record_wall_time) {
  std::string out = "cycle,labeled_count,train_loss,eval_accuracy,wall_time_s\n";
  char wall[40];
  for (const CycleRecord& rec : run.cycles) {
    std::snprintf(wall, sizeof(wall), "%.3f", record_wall_time ? rec.wall_time_s : 0.0);
    out += std::to_string(rec.cycle) + "," + std::to_string(rec.labeled_count) + "," +
           fmt_g(rec.train_loss) + "," + fmt_g(rec.eval_accuracy) + "," + wall + "\n";
  }
  return out;
}

std::string summary_csv_text(std::span<const RunSummary> summaries) {
  std::string out = "strategy,pretrain,mean_acc,std_acc,seeds\n";
  for (const RunSummary& s : summaries) {
    out += s.strategy_id + "," + s.pretrain_id + "," + fmt_g(s.mean_accuracy) + "," +
           fmt_g(s.std_accuracy) + "," + std::to_string(s.seeds.size()) + "\n";
  }
  return out;
}

void dump_score_csv(const std::string& dir, std::size_t cycle, const SelectionResult& result) {
  if (!result.scores.has_value()) return;
  const ScoreTable& table = *result.scores;
  // rank 1 = best under the table's orientation
  std::vector<std::size_t> order(table.scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const bool higher = table.orientation == ScoreOrientation::kHigherSelected;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (table.scores[a] != table.scores[b]) {
      return higher ? table.scores[a] > table.scores[b] : table.scores[a] < table.scores[b];
    }
    return a < b;
  });
  std::vector<std::size_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;

  std::vector<char> chosen(result.scored_candidates.size(), 0);
  for (std::size_t idx : result.chosen) {
    for (std::size_t i = 0; i < result.scored_candidates.size(); ++i) {
      if (result.scored_candidates[i] == idx) {
        chosen[i] = 1;
        break;
      }
    }
  }

  std::string out = "index,score,rank,chosen\n";
  for (std::size_t i = 0; i < result.scored_candidates.size(); ++i) {
    out += std::to_string(result.scored_candidates[i]) + "," + fmt_g(table.scores[i]) + "," +
           std::to_string(rank[i]) + "," + (chosen[i] ? "1" : "0") + "\n";
  }
  fs::create_directories(dir);
  write_atomic(dir + "/scores_cycle" + std::to_string(cycle) + ".csv", out);
}

SeedRunResult run_one_seed(const ExperimentConfig& config, std::uint64_t seed,
                           const std::string& out_dir) {
  const RngStream seed_rng(seed);
  Dataset data = load_dataset(config, seed);
  const std::size_t pool_size = data.pool.size();

  BudgetLedger ledger = make_ledger(config, pool_size);
  IndexPartition partition(pool_size);

  // Reference initialization: every cycle restarts from these weights (plus
  // a zeroed head), so cycles differ only in their labeled data.
  EncoderSpec enc_spec = encoder_spec_for(config, data.pool);
  std::unique_ptr<Encoder> init_encoder = make_encoder(enc_spec);
  {
    RngStream init_rng = seed_rng.split(kModelInitKey);
    init_encoder->init(init_rng);
  }

  if (config.pretrain != "none") {
    PretrainConfig pc = config.pretrain_config;
    pc.method = parse_ssl_method(config.pretrain);
    pc.seed = seed_rng.split(kPretrainKey).seed();
    pc.augment = AugmentationPolicy::for_pool(data.pool, config.aug_noise, config.aug_jitter,
                                              config.aug_flip_prob, config.aug_crop_pad);
    if (!out_dir.empty()) {
      pc.loss_csv_path = out_dir + "/pretrain_loss_" + std::to_string(seed) + ".csv";
    }
    pretrain(*init_encoder, data.pool, pc);
    if (data.oracle.query_count() != 0) {
      throw std::logic_error("pretraining touched the oracle: query_count = " +
                             std::to_string(data.oracle.query_count()));
    }
    if (!config.save_pretrained.empty()) {
      save_encoder(*init_encoder, config.save_pretrained + "_" + std::to_string(seed) + ".ckpt");
    }
  }

  std::vector<int> known_labels(pool_size, -1);
  std::vector<std::size_t> last_selected;
  {
    RngStream sample_rng = seed_rng.split(kInitialSampleKey);
    const std::vector<int> labels =
        initial_random_sample(partition, ledger, data.oracle, sample_rng, &last_selected);
    for (std::size_t i = 0; i < last_selected.size(); ++i) {
      known_labels[last_selected[i]] = labels[i];
    }
  }

  ProbabilisticClassifier model(init_encoder->clone(), data.pool.num_classes, config.dropout);

  SeedRunResult result;
  result.seed = seed;
  const std::size_t cycles = config.cycles;
  for (std::size_t cycle = 1; cycle <= cycles; ++cycle) {
    const auto t0 = std::chrono::steady_clock::now();

    if (!config.warm_start || cycle == 1) {
      // reset to the (pre-trained or reference random) initialization
      const std::vector<DenseMatrix*> src = init_encoder->params();
      const std::vector<DenseMatrix*> dst = model.encoder().params();
      for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = *src[i];
      model.init_head();
    }

    TrainConfig tc = config.train;
    tc.epochs = config.epochs_per_cycle;
    tc.seed = seed_rng.split(kTrainKey).split(cycle).seed();
    std::vector<int> labels_in_order(partition.labeled().size());
    for (std::size_t i = 0; i < partition.labeled().size(); ++i) {
      labels_in_order[i] = known_labels[partition.labeled()[i]];
    }
    const TrainResult trained =
        train_supervised(model, data.pool, partition.labeled(), labels_in_order, tc);

    CycleRecord rec;
    rec.cycle = cycle;
    rec.labeled_count = partition.labeled().size();
    rec.train_loss = trained.final_loss;
    rec.eval_accuracy = evaluate(model, data.eval);
    rec.selected_indices = last_selected;

    if (cycle < cycles) {
      const std::size_t quota = cycle_quota(ledger, cycle + 1);
      SelectionRequest request;
      request.batch_size = quota;
      request.pool = &data.pool;
      request.partition = &partition;
      request.model = &model;
      request.known_labels = known_labels;
      request.rng = seed_rng.split(kSelectKey).split(cycle);
      request.params = config.strategy_params;
      const SelectionResult selection = run_strategy(config.strategy, request);

      if (config.dump_scores && !out_dir.empty()) {
        dump_score_csv(out_dir + "/seed_" + std::to_string(seed), cycle + 1, selection);
      }

      const std::vector<int> labels = annotate(partition, ledger, data.oracle, selection.chosen);
      for (std::size_t i = 0; i < selection.chosen.size(); ++i) {
        known_labels[selection.chosen[i]] = labels[i];
      }
      last_selected = selection.chosen;
    }

    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.cycles.push_back(std::move(rec));
  }

  if (ledger.spent() != ledger.total_budget() ||
      data.oracle.query_count() != ledger.total_budget()) {
    throw std::logic_error("budget accounting violation: spent " +
                           std::to_string(ledger.spent()) + ", queried " +
                           std::to_string(data.oracle.query_count()) + ", budget " +
                           std::to_string(ledger.total_budget()));
  }

  result.final_accuracy = result.cycles.back().eval_accuracy;
  result.oracle_queries = data.oracle.query_count();
  return result;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.dataset == "synthetic") {
    RngStream data_rng = RngStream(seed).split(kDataKey);
    return synth_gaussian_mixture(config.synthetic, data_rng);
  }
  if (config.dataset == "fer2013") {
    PixelCsv csv = load_fer2013_csv(config.fer2013_csv);
    Dataset out;
    out.pool = std::move(csv.pool);
    out.oracle = std::move(csv.oracle);
    out.eval = config.eval_split == "private_test" ? std::move(csv.eval_private)
                                                   : std::move(csv.eval_public);
    return out;
  }
  throw std::invalid_argument("unknown dataset '" + config.dataset + "'");
}

BudgetLedger make_ledger(const ExperimentConfig& config, std::size_t pool_size) {
  std::size_t n = static_cast<std::size_t>(
      std::llround(config.budget_fraction * static_cast<double>(pool_size)));
  std::size_t s = static_cast<std::size_t>(
      std::llround(config.initial_fraction * static_cast<double>(pool_size)));
  n = std::clamp<std::size_t>(n, 1, pool_size);
  s = std::clamp<std::size_t>(s, 1, n);
  return BudgetLedger(n, s, config.cycles, pool_size);
}

double evaluate(const ProbabilisticClassifier& model, const EvalSet& eval) {
  if (eval.size() == 0) throw std::invalid_argument("evaluate: eval set is empty");
  constexpr std::size_t kChunk = 512;
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < eval.size(); lo += kChunk) {
    const std::size_t hi = std::min(eval.size(), lo + kChunk);
    DenseMatrix x(hi - lo, eval.features.cols());
    std::copy(eval.features.data() + lo * x.cols(), eval.features.data() + hi * x.cols(),
              x.data());
    const DenseMatrix p = model.predict_proba(x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < p.cols(); ++j) {
        if (p(i, j) > p(i, arg)) arg = j;
      }
      if (static_cast<int>(arg) == eval.labels[lo + i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  validate_config(config);
  if (!out_dir.empty()) fs::create_directories(out_dir);

  RunSummary summary;
  summary.config_hash = config.config_hash();
  summary.strategy_id = config.strategy;
  summary.pretrain_id = config.pretrain;
  summary.seeds = config.seeds;

  for (std::uint64_t seed : config.seeds) {
    SeedRunResult run = run_one_seed(config, seed, out_dir);
    if (!out_dir.empty()) {
      write_atomic(out_dir + "/cycles_" + std::to_string(seed) + ".csv",
                   cycles_csv_text(run, config.record_wall_time));
    }
    summary.final_accuracies.push_back(run.final_accuracy);
    summary.runs.push_back(std::move(run));
  }

  double mean = 0.0;
  for (double a : summary.final_accuracies) mean += a;
  mean /= static_cast<double>(summary.final_accuracies.size());
  summary.mean_accuracy = mean;
  summary.std_accuracy = sample_std(summary.final_accuracies, mean);

  if (!out_dir.empty()) {
    write_atomic(out_dir + "/summary.csv", summary_csv_text({&summary, 1}));
  }
  return summary;
}

std::vector<RunSummary> compare_strategies(const std::vector<ExperimentConfig>& configs,
                                           const std::string& out_dir) {
  if (configs.empty()) throw std::invalid_argument("compare: no configs given");
  const ExperimentConfig& first = configs.front();
  for (const ExperimentConfig& c : configs) {
    if (c.seeds != first.seeds) {
      throw std::invalid_argument("compare: configs disagree on seeds");
    }
    if (c.dataset != first.dataset || c.fer2013_csv != first.fer2013_csv ||
        c.synthetic.num_classes != first.synthetic.num_classes ||
        c.synthetic.dims != first.synthetic.dims ||
        c.synthetic.per_class != first.synthetic.per_class ||
        c.synthetic.spread != first.synthetic.spread ||
        c.synthetic.imbalance != first.synthetic.imbalance) {
      throw std::invalid_argument("compare: configs disagree on the dataset");
    }
    if (c.budget_fraction != first.budget_fraction ||
        c.initial_fraction != first.initial_fraction || c.cycles != first.cycles) {
      throw std::invalid_argument("compare: configs disagree on budget arithmetic");
    }
  }

  std::vector<RunSummary> summaries;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string sub =
        out_dir.empty() ? ""
                        : out_dir + "/" + configs[i].strategy + "_" + configs[i].pretrain + "_" +
                              std::to_string(i);
    summaries.push_back(run_experiment(configs[i], sub));
  }

  // rank order: best mean first; ties keep config order
  std::vector<std::size_t> order(summaries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return summaries[a].mean_accuracy > summaries[b].mean_accuracy;
  });
  std::vector<RunSummary> ranked;
  ranked.reserve(order.size());
  for (std::size_t i : order) ranked.push_back(summaries[i]);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_atomic(out_dir + "/summary.csv", summary_csv_text(ranked));
  }
  return ranked;
}

std::vector<RunSummary> sweep(const std::string& axis, const std::vector<std::string>& values,
                              const ExperimentConfig& base, const std::string& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  static const std::vector<std::string> axes = {"initial_fraction", "cycles", "epochs_per_cycle",
                                                "budget_fraction", "optimizer"};
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    throw std::invalid_argument("sweep: unknown axis '" + axis +
                                "' (expected initial_fraction|cycles|epochs_per_cycle|"
                                "budget_fraction|optimizer)");
  }
  // Validate every value before any run starts.
  std::vector<ExperimentConfig> configs;
  for (const std::string& v : values) {
    ExperimentConfig c = base;
    apply_config_override(c, axis, v);
    validate_config(c);
    configs.push_back(std::move(c));
  }

  std::vector<RunSummary> summaries;
  std::string sweep_csv = "axis_value,mean,std\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string sub = out_dir.empty() ? "" : out_dir + "/" + axis + "_" + values[i];
    summaries.push_back(run_experiment(configs[i], sub));
    sweep_csv += values[i] + "," + fmt_g(summaries.back().mean_accuracy) + "," +
                 fmt_g(summaries.back().std_accuracy) + "\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_atomic(out_dir + "/sweep.csv", sweep_csv);
  }
  return summaries;
}

}  // namespace albench
