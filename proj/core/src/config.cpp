#include "albench/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace albench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument("config: bad numeric value '" + v + "' for key '" + key + "'");
  }
}

std::size_t parse_count(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(n);
  } catch (...) {
    throw std::invalid_argument("config: bad count value '" + v + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "' for key '" + key + "'");
}

template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& v, const std::string& key, Fn parse_one) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_one(item, key));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for key '" + key + "'");
  return out;
}

OptimizerKind parse_optimizer(const std::string& v, const std::string& key) {
  if (v == "sgd") return OptimizerKind::kSgd;
  if (v == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("config: optimizer '" + v + "' for key '" + key +
                              "' (expected sgd|adam)");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_config_override(ExperimentConfig& c, const std::string& key,
                           const std::string& value) {
  const std::string v = trim(value);
  if (key == "dataset") {
    if (v != "synthetic" && v != "fer2013") {
      throw std::invalid_argument("config: dataset '" + v + "' (expected synthetic|fer2013)");
    }
    c.dataset = v;
  } else if (key == "fer2013_csv") {
    c.fer2013_csv = v;
  } else if (key == "eval_split") {
    if (v != "public_test" && v != "private_test") {
      throw std::invalid_argument("config: eval_split '" + v +
                                  "' (expected public_test|private_test)");
    }
    c.eval_split = v;
  } else if (key == "synthetic_classes") {
    c.synthetic.num_classes = parse_count(v, key);
  } else if (key == "synthetic_dims") {
    c.synthetic.dims = parse_count(v, key);
  } else if (key == "synthetic_per_class") {
    c.synthetic.per_class = parse_count(v, key);
  } else if (key == "synthetic_spread") {
    c.synthetic.spread = parse_double(v, key);
  } else if (key == "synthetic_imbalance") {
    c.synthetic.imbalance = parse_list<double>(v, key, parse_double);
  } else if (key == "synthetic_eval_per_class") {
    c.synthetic.eval_per_class = parse_count(v, key);
  } else if (key == "budget_fraction") {
    c.budget_fraction = parse_double(v, key);
  } else if (key == "initial_fraction") {
    c.initial_fraction = parse_double(v, key);
  } else if (key == "cycles") {
    c.cycles = parse_count(v, key);
  } else if (key == "epochs_per_cycle") {
    c.epochs_per_cycle = parse_count(v, key);
  } else if (key == "warm_start") {
    c.warm_start = parse_bool(v, key);
  } else if (key == "model") {
    if (v != "linear" && v != "mlp" && v != "conv") {
      throw std::invalid_argument("config: model '" + v + "' (expected linear|mlp|conv)");
    }
    c.model = v;
  } else if (key == "hidden_dims") {
    c.hidden_dims = parse_list<std::size_t>(v, key, parse_count);
  } else if (key == "embedding_dim") {
    c.embedding_dim = parse_count(v, key);
  } else if (key == "activation") {
    if (v != "relu" && v != "tanh") {
      throw std::invalid_argument("config: activation '" + v + "' (expected relu|tanh)");
    }
    c.activation = v;
  } else if (key == "dropout") {
    c.dropout = parse_double(v, key);
  } else if (key == "optimizer") {
    c.train.optimizer = parse_optimizer(v, key);
  } else if (key == "learning_rate") {
    c.train.learning_rate = parse_double(v, key);
  } else if (key == "batch_size") {
    c.train.batch_size = parse_count(v, key);
  } else if (key == "momentum") {
    c.train.momentum = parse_double(v, key);
  } else if (key == "strategy") {
    c.strategy = v;
  } else if (key == "bald_passes") {
    c.strategy_params.bald_passes = parse_count(v, key);
  } else if (key == "deepfool_max_iters") {
    c.strategy_params.deepfool_max_iters = parse_count(v, key);
  } else if (key == "deepfool_overshoot") {
    c.strategy_params.deepfool_overshoot = parse_double(v, key);
  } else if (key == "glister_lr") {
    c.strategy_params.glister_lr = parse_double(v, key);
  } else if (key == "glister_val_fraction") {
    c.strategy_params.glister_val_fraction = parse_double(v, key);
  } else if (key == "coreset_space") {
    if (v != "embedding" && v != "raw") {
      throw std::invalid_argument("config: coreset_space '" + v + "' (expected embedding|raw)");
    }
    c.strategy_params.coreset_raw_features = (v == "raw");
  } else if (key == "candidate_cap") {
    c.strategy_params.candidate_cap = parse_count(v, key);
  } else if (key == "score_threads") {
    c.strategy_params.score_threads = parse_count(v, key);
  } else if (key == "dump_scores") {
    c.dump_scores = parse_bool(v, key);
  } else if (key == "pretrain") {
    if (v != "none") parse_ssl_method(v);  // validates
    c.pretrain = v;
  } else if (key == "pretrain_epochs") {
    c.pretrain_config.epochs = parse_count(v, key);
  } else if (key == "pretrain_batch_size") {
    c.pretrain_config.batch_size = parse_count(v, key);
  } else if (key == "pretrain_optimizer") {
    c.pretrain_config.optimizer = parse_optimizer(v, key);
  } else if (key == "pretrain_lr") {
    c.pretrain_config.learning_rate = parse_double(v, key);
  } else if (key == "projection_dim") {
    c.pretrain_config.projection_dim = parse_count(v, key);
  } else if (key == "temperature") {
    c.pretrain_config.temperature = parse_double(v, key);
  } else if (key == "moco_momentum") {
    c.pretrain_config.moco_momentum = parse_double(v, key);
  } else if (key == "moco_queue") {
    c.pretrain_config.moco_queue_capacity = parse_count(v, key);
  } else if (key == "byol_momentum") {
    c.pretrain_config.byol_momentum = parse_double(v, key);
  } else if (key == "swav_prototypes") {
    c.pretrain_config.swav_prototypes = parse_count(v, key);
  } else if (key == "swav_epsilon") {
    c.pretrain_config.swav_epsilon = parse_double(v, key);
  } else if (key == "swav_sinkhorn_iters") {
    c.pretrain_config.swav_sinkhorn_iters = parse_count(v, key);
  } else if (key == "barlow_lambda") {
    c.pretrain_config.barlow_lambda = parse_double(v, key);
  } else if (key == "save_pretrained") {
    c.save_pretrained = v;
  } else if (key == "aug_noise") {
    c.aug_noise = parse_double(v, key);
  } else if (key == "aug_jitter") {
    c.aug_jitter = parse_double(v, key);
  } else if (key == "aug_flip_prob") {
    c.aug_flip_prob = parse_double(v, key);
  } else if (key == "aug_crop_pad") {
    c.aug_crop_pad = parse_count(v, key);
  } else if (key == "seeds") {
    c.seeds = parse_list<std::uint64_t>(v, key, [](const std::string& s, const std::string& k) {
      try {
        return static_cast<std::uint64_t>(std::stoull(s));
      } catch (...) {
        throw std::invalid_argument("config: bad seed '" + s + "' for key '" + k + "'");
      }
    });
  } else if (key == "record_wall_time") {
    c.record_wall_time = parse_bool(v, key);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + " line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_override(c, key, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument(origin + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

void validate_config(const ExperimentConfig& c) {
  if (c.initial_fraction <= 0.0 || c.initial_fraction > c.budget_fraction ||
      c.budget_fraction > 1.0) {
    throw std::invalid_argument(
        "config: need 0 < initial_fraction <= budget_fraction <= 1, got initial_fraction=" +
        fmt_double(c.initial_fraction) + " budget_fraction=" + fmt_double(c.budget_fraction));
  }
  if (c.cycles < 2) throw std::invalid_argument("config: cycles must be >= 2");
  if (c.epochs_per_cycle < 1) throw std::invalid_argument("config: epochs_per_cycle must be >= 1");
  if (c.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (c.dataset == "fer2013" && c.fer2013_csv.empty()) {
    throw std::invalid_argument("config: dataset fer2013 requires fer2013_csv");
  }
  if (c.train.learning_rate <= 0.0) throw std::invalid_argument("config: learning_rate must be > 0");
  if (c.train.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (c.dropout < 0.0 || c.dropout >= 1.0) {
    throw std::invalid_argument("config: dropout must be in [0,1)");
  }
  const auto& ids = strategy_ids();
  if (std::find(ids.begin(), ids.end(), c.strategy) == ids.end()) {
    std::string known;
    for (const auto& id : ids) known += (known.empty() ? "" : "|") + id;
    throw std::invalid_argument("config: unknown strategy '" + c.strategy + "' (expected " +
                                known + ")");
  }
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["dataset"] = dataset;
  kv["fer2013_csv"] = fer2013_csv;
  kv["eval_split"] = eval_split;
  kv["synthetic_classes"] = std::to_string(synthetic.num_classes);
  kv["synthetic_dims"] = std::to_string(synthetic.dims);
  kv["synthetic_per_class"] = std::to_string(synthetic.per_class);
  kv["synthetic_spread"] = fmt_double(synthetic.spread);
  {
    std::string s;
    for (double r : synthetic.imbalance) s += (s.empty() ? "" : ",") + fmt_double(r);
    kv["synthetic_imbalance"] = s;
  }
  kv["synthetic_eval_per_class"] = std::to_string(synthetic.eval_per_class);
  kv["budget_fraction"] = fmt_double(budget_fraction);
  kv["initial_fraction"] = fmt_double(initial_fraction);
  kv["cycles"] = std::to_string(cycles);
  kv["epochs_per_cycle"] = std::to_string(epochs_per_cycle);
  kv["warm_start"] = warm_start ? "true" : "false";
  kv["model"] = model;
  {
    std::string s;
    for (std::size_t h : hidden_dims) s += (s.empty() ? "" : ",") + std::to_string(h);
    kv["hidden_dims"] = s;
  }
  kv["embedding_dim"] = std::to_string(embedding_dim);
  kv["activation"] = activation;
  kv["dropout"] = fmt_double(dropout);
  kv["optimizer"] = train.optimizer == OptimizerKind::kSgd ? "sgd" : "adam";
  kv["learning_rate"] = fmt_double(train.learning_rate);
  kv["batch_size"] = std::to_string(train.batch_size);
  kv["momentum"] = fmt_double(train.momentum);
  kv["strategy"] = strategy;
  kv["bald_passes"] = std::to_string(strategy_params.bald_passes);
  kv["deepfool_max_iters"] = std::to_string(strategy_params.deepfool_max_iters);
  kv["deepfool_overshoot"] = fmt_double(strategy_params.deepfool_overshoot);
  kv["glister_lr"] = fmt_double(strategy_params.glister_lr);
  kv["glister_val_fraction"] = fmt_double(strategy_params.glister_val_fraction);
  kv["coreset_space"] = strategy_params.coreset_raw_features ? "raw" : "embedding";
  kv["candidate_cap"] = std::to_string(strategy_params.candidate_cap);
  kv["score_threads"] = std::to_string(strategy_params.score_threads);
  kv["dump_scores"] = dump_scores ? "true" : "false";
  kv["pretrain"] = pretrain;
  kv["pretrain_epochs"] = std::to_string(pretrain_config.epochs);
  kv["pretrain_batch_size"] = std::to_string(pretrain_config.batch_size);
  kv["pretrain_optimizer"] =
      pretrain_config.optimizer == OptimizerKind::kSgd ? "sgd" : "adam";
  kv["pretrain_lr"] = fmt_double(pretrain_config.learning_rate);
  kv["projection_dim"] = std::to_string(pretrain_config.projection_dim);
  kv["temperature"] = fmt_double(pretrain_config.temperature);
  kv["moco_momentum"] = fmt_double(pretrain_config.moco_momentum);
  kv["moco_queue"] = std::to_string(pretrain_config.moco_queue_capacity);
  kv["byol_momentum"] = fmt_double(pretrain_config.byol_momentum);
  kv["swav_prototypes"] = std::to_string(pretrain_config.swav_prototypes);
  kv["swav_epsilon"] = fmt_double(pretrain_config.swav_epsilon);
  kv["swav_sinkhorn_iters"] = std::to_string(pretrain_config.swav_sinkhorn_iters);
  kv["barlow_lambda"] = fmt_double(pretrain_config.barlow_lambda);
  kv["save_pretrained"] = save_pretrained;
  kv["aug_noise"] = fmt_double(aug_noise);
  kv["aug_jitter"] = fmt_double(aug_jitter);
  kv["aug_flip_prob"] = fmt_double(aug_flip_prob);
  kv["aug_crop_pad"] = std::to_string(aug_crop_pad);
  {
    std::string s;
    for (std::uint64_t v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
    kv["seeds"] = s;
  }
  kv["record_wall_time"] = record_wall_time ? "true" : "false";

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::config_hash() const {
  const std::string text = canonical_text();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace albench
