#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "albench/encoder.hpp"
#include "albench/pretrain.hpp"
#include "albench/strategies.hpp"
#include "albench/synthetic.hpp"
#include "albench/train.hpp"

namespace albench {

/// Full experiment description, parsed from a flat `key = value` file
/// (one pair per line, `#` comments, unknown keys rejected).
struct ExperimentConfig {
  // dataset
  std::string dataset = "synthetic";  // synthetic | fer2013
  std::string fer2013_csv;
  std::string eval_split = "public_test";  // public_test | private_test
  SyntheticSpec synthetic;

  // budget / protocol
  double budget_fraction = 0.40;
  double initial_fraction = 0.05;
  std::size_t cycles = 7;
  std::size_t epochs_per_cycle = 30;
  bool warm_start = false;

  // model
  std::string model = "mlp";  // linear | mlp | conv
  std::vector<std::size_t> hidden_dims = {64, 32};
  std::size_t embedding_dim = 64;  // conv projection
  std::string activation = "relu";
  double dropout = 0.1;

  // supervised training
  TrainConfig train;

  // strategy
  std::string strategy = "least_confidence";
  StrategyParams strategy_params;
  bool dump_scores = false;

  // pretraining
  std::string pretrain = "none";  // none | simclr | moco_v2 | byol | swav | barlow
  PretrainConfig pretrain_config;
  std::string save_pretrained;  // optional checkpoint path prefix

  // augmentation strengths
  double aug_noise = 0.05;
  double aug_jitter = 0.2;
  double aug_flip_prob = 0.5;
  std::size_t aug_crop_pad = 4;

  // run control
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool record_wall_time = true;

  /// FNV-1a hash of the canonical key=value serialization.
  std::string config_hash() const;
  /// Canonical serialization (sorted keys), also what the hash covers.
  std::string canonical_text() const;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

/// Applies one `key = value` override (same grammar as config lines).
void apply_config_override(ExperimentConfig& config, const std::string& key,
                           const std::string& value);

void validate_config(const ExperimentConfig& config);

}  // namespace albench
