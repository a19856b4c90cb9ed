#pragma once

#include <optional>
#include <string>

#include "albench/classifier.hpp"
#include "albench/partition.hpp"
#include "albench/scores.hpp"

namespace albench {

struct StrategyParams {
  std::size_t bald_passes = 25;
  std::size_t deepfool_max_iters = 20;
  double deepfool_overshoot = 0.02;
  double glister_lr = 0.05;
  double glister_val_fraction = 0.2;
  bool coreset_raw_features = false;  // distances in embedding space by default
  std::size_t candidate_cap = 0;      // 0 = score the whole unlabeled set
  std::size_t score_threads = 1;      // per-candidate scoring parallelism
};

/// Everything a selection policy may look at. known_labels holds one entry
/// per pool row, -1 where not yet annotated; only labeled rows carry real
/// labels (GLISTER's validation shard reads them).
struct SelectionRequest {
  std::size_t batch_size = 1;
  const SamplePool* pool = nullptr;
  const IndexPartition* partition = nullptr;
  const ProbabilisticClassifier* model = nullptr;
  std::span<const int> known_labels;
  RngStream rng{0};
  StrategyParams params;
};

struct SelectionResult {
  std::vector<std::size_t> chosen;  // pool indices, best-first
  std::string strategy_id;
  // Candidate-aligned score table, when the strategy ranks by score.
  std::vector<std::size_t> scored_candidates;
  std::optional<ScoreTable> scores;
};

SelectionResult select_random(const SelectionRequest& request);
SelectionResult select_entropy(const SelectionRequest& request);
SelectionResult select_margin(const SelectionRequest& request);
SelectionResult select_least_confidence(const SelectionRequest& request);
SelectionResult select_bald(const SelectionRequest& request);
SelectionResult select_deepfool(const SelectionRequest& request);
SelectionResult select_badge(const SelectionRequest& request);
SelectionResult select_coreset(const SelectionRequest& request);
SelectionResult select_glister(const SelectionRequest& request);

/// Dispatch by id: random | entropy | margin | least_confidence | badge |
/// glister | coreset | bald | deepfool.
SelectionResult run_strategy(const std::string& strategy_id, const SelectionRequest& request);
const std::vector<std::string>& strategy_ids();

/// DeepFool decision-boundary probe for one sample: iterative linearization
/// until the predicted class flips. The returned norm is the accumulated
/// perturbation; flip checks apply the overshoot factor.
struct DeepFoolOutcome {
  double perturbation_norm = 0.0;
  std::size_t iterations = 0;
  bool flipped = false;
};
DeepFoolOutcome deepfool_probe(const ProbabilisticClassifier& model, std::span<const double> x,
                               std::size_t max_iters, double overshoot);

/// Sentinel score for candidates DeepFool could not flip within max_iters.
inline constexpr double kDeepFoolNoFlip = 1e30;

/// Candidate embeddings in chunks, optionally sharded over threads; results
/// are merged in index order and bit-identical to the sequential path.
DenseMatrix embed_rows(const ProbabilisticClassifier& model, const SamplePool& pool,
                       std::span<const std::size_t> indices, std::size_t threads);

}  // namespace albench
