#pragma once

#include <memory>
#include <optional>
#include <string>

#include "albench/augment.hpp"
#include "albench/encoder.hpp"
#include "albench/momentum.hpp"
#include "albench/ssl_objectives.hpp"
#include "albench/train.hpp"

namespace albench {

enum class SslMethod { kSimclr, kMocoV2, kByol, kSwav, kBarlow };

SslMethod parse_ssl_method(const std::string& name);
std::string ssl_method_name(SslMethod method);

struct PretrainConfig {
  SslMethod method = SslMethod::kSimclr;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  std::size_t projection_dim = 32;
  double temperature = 0.5;           // simclr / moco / swav scores
  double moco_momentum = 0.99;
  std::size_t moco_queue_capacity = 1024;
  double byol_momentum = 0.99;
  std::size_t swav_prototypes = 32;
  double swav_epsilon = 0.05;
  std::size_t swav_sinkhorn_iters = 3;
  double barlow_lambda = 0.005;
  AugmentationPolicy augment;
  std::uint64_t seed = 0;
  std::string loss_csv_path;  // optional `epoch,loss` CSV
};

/// One self-supervised objective wired to an encoder: owns the projection
/// head, any momentum/queue/prototype state, and the optimizer. The labeled
/// world is unreachable from here: only the pool's features ever enter.
class PretrainSession {
 public:
  PretrainSession(Encoder& encoder, const SamplePool& pool, const PretrainConfig& config);
  ~PretrainSession();
  PretrainSession(const PretrainSession&) = delete;
  PretrainSession& operator=(const PretrainSession&) = delete;

  /// One optimization step on the given pool indices. view_rng drives the
  /// per-sample augmentation substreams. Returns the step loss.
  double step(std::span<const std::size_t> batch, const RngStream& view_rng);

  // Method-specific state, exposed for inspection/tests.
  const NegativeQueue* queue() const;
  const PrototypeBank* prototype_bank() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct PretrainResult {
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
};

/// Pre-trains the encoder in place on the whole pool (labels are never
/// touched: no oracle parameter exists on this path). epochs == 0 is a no-op.
PretrainResult pretrain(Encoder& encoder, const SamplePool& pool, const PretrainConfig& config);

}  // namespace albench
