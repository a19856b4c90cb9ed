#pragma once

#include <memory>
#include <span>
#include <vector>

#include "albench/encoder.hpp"
#include "albench/pool.hpp"

namespace albench {

/// Encoder + linear head (W: K x e, b: 1 x K) exposing exactly the signals
/// the selection strategies need: probabilities, embeddings, stochastic
/// passes, input gradients, and last-layer gradients.
class ProbabilisticClassifier {
 public:
  ProbabilisticClassifier(std::unique_ptr<Encoder> encoder, std::size_t num_classes,
                          double dropout_rate);
  ProbabilisticClassifier(const ProbabilisticClassifier& other);
  ProbabilisticClassifier& operator=(const ProbabilisticClassifier& other);
  ProbabilisticClassifier(ProbabilisticClassifier&&) = default;
  ProbabilisticClassifier& operator=(ProbabilisticClassifier&&) = default;

  std::size_t num_classes() const { return head_w_.rows(); }
  std::size_t embedding_dim() const { return encoder_->embedding_dim(); }
  std::size_t input_dim() const { return encoder_->input_dim(); }
  double dropout_rate() const { return dropout_rate_; }

  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }
  DenseMatrix& head_w() { return head_w_; }
  const DenseMatrix& head_w() const { return head_w_; }
  DenseMatrix& head_b() { return head_b_; }
  const DenseMatrix& head_b() const { return head_b_; }

  /// Random-initializes the encoder; the head starts at zero (uniform
  /// predictions until trained).
  void init(RngStream& rng);
  void init_head();

  std::vector<DenseMatrix*> all_params();

  /// Taped forward to logits. With bound != nullptr all parameters require
  /// gradients; with mask_rng != nullptr dropout is live.
  ValueId forward_logits(Tape& t, ValueId input, RngStream* mask_rng,
                         std::vector<BoundParam>* bound);

  // Deterministic batch paths (dropout off).
  DenseMatrix logits(const DenseMatrix& x) const;
  DenseMatrix predict_proba(const DenseMatrix& x) const;
  DenseMatrix embed(const DenseMatrix& x) const;

  /// T stochastic forward passes with independent dropout masks; pass t uses
  /// rng.split(t), so the passes are exchangeable. Requires dropout_rate > 0
  /// and passes >= 2.
  std::vector<DenseMatrix> stochastic_predict(const DenseMatrix& x, std::size_t passes,
                                              const RngStream& rng) const;

  /// Gradient of logit target_class (not the probability) w.r.t. the input
  /// row.
  std::vector<double> input_gradient(std::span<const double> sample,
                                     std::size_t target_class) const;

  /// Cross-entropy gradient at the pseudo-label w.r.t. the head weights,
  /// flattened row-major over (class, embedding): (p - onehot(y)) outer h(x).
  std::vector<double> last_layer_gradient(std::span<const double> sample, int pseudo_label) const;

 private:
  std::unique_ptr<Encoder> encoder_;
  DenseMatrix head_w_;  // K x e
  DenseMatrix head_b_;  // 1 x K
  double dropout_rate_ = 0.0;
};

/// Gathers feature rows by pool index into a batch matrix.
DenseMatrix gather_rows(const DenseMatrix& features, std::span<const std::size_t> indices);

// Pool-indexed conveniences.
DenseMatrix predict_proba(const ProbabilisticClassifier& model, const SamplePool& pool,
                          std::span<const std::size_t> indices);
std::vector<DenseMatrix> stochastic_predict(const ProbabilisticClassifier& model,
                                            const SamplePool& pool,
                                            std::span<const std::size_t> indices,
                                            std::size_t passes, const RngStream& rng);

}  // namespace albench
