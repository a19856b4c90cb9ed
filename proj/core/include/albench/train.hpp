#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "albench/classifier.hpp"

namespace albench {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double learning_rate = 0.01;
  std::size_t batch_size = 20;
  std::size_t epochs = 1;
  double momentum = 0.9;  // sgd only
  std::uint64_t seed = 0;
};

/// Stateful first-order optimizer over a fixed parameter list.
class ParamOptimizer {
 public:
  virtual ~ParamOptimizer() = default;
  /// grads[i] may be empty (parameter unreached this step) and is treated as
  /// zero.
  virtual void step(std::span<DenseMatrix* const> params,
                    std::span<const DenseMatrix> grads) = 0;

  static std::unique_ptr<ParamOptimizer> create(const TrainConfig& config);
};

struct TrainResult {
  double final_loss = 0.0;  // mean batch loss of the last epoch
};

/// Builds the mean cross-entropy loss node for a batch: labels become a
/// constant one-hot mask over the fused log-softmax.
ValueId cross_entropy_loss(Tape& t, ValueId logits, std::span<const int> labels);

/// Mini-batch supervised training on the labeled rows. Batch order and
/// dropout masks derive from config.seed, so a fixed seed reproduces the
/// final parameters bit-exactly.
TrainResult train_supervised(ProbabilisticClassifier& model, const SamplePool& pool,
                             std::span<const std::size_t> labeled_indices,
                             std::span<const int> labels, const TrainConfig& config);

/// Reads the adjoints of bound parameters off the tape (empty matrix where
/// no gradient reached the leaf).
std::vector<DenseMatrix> collect_grads(const Tape& t, std::span<const BoundParam> bound);

}  // namespace albench
