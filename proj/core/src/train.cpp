#include "albench/train.hpp"

#include <cmath>
#include <stdexcept>

namespace albench {

namespace {

class SgdOptimizer final : public ParamOptimizer {
 public:
  SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads) override {
    if (velocity_.empty()) {
      for (const DenseMatrix* p : params) velocity_.emplace_back(p->rows(), p->cols(), 0.0);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (grads[i].empty()) continue;
      DenseMatrix& v = velocity_[i];
      DenseMatrix& p = *params[i];
      for (std::size_t k = 0; k < p.size(); ++k) {
        v.data()[k] = momentum_ * v.data()[k] + grads[i].data()[k];
        p.data()[k] -= lr_ * v.data()[k];
      }
    }
  }

 private:
  double lr_, momentum_;
  std::vector<DenseMatrix> velocity_;
};

class AdamOptimizer final : public ParamOptimizer {
 public:
  explicit AdamOptimizer(double lr) : lr_(lr) {}

  void step(std::span<DenseMatrix* const> params, std::span<const DenseMatrix> grads) override {
    if (m_.empty()) {
      for (const DenseMatrix* p : params) {
        m_.emplace_back(p->rows(), p->cols(), 0.0);
        v_.emplace_back(p->rows(), p->cols(), 0.0);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (grads[i].empty()) continue;
      DenseMatrix& p = *params[i];
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double g = grads[i].data()[k];
        m_[i].data()[k] = kBeta1 * m_[i].data()[k] + (1.0 - kBeta1) * g;
        v_[i].data()[k] = kBeta2 * v_[i].data()[k] + (1.0 - kBeta2) * g * g;
        const double mhat = m_[i].data()[k] / bc1;
        const double vhat = v_[i].data()[k] / bc2;
        p.data()[k] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<DenseMatrix> m_, v_;
};

}  // namespace

std::unique_ptr<ParamOptimizer> ParamOptimizer::create(const TrainConfig& config) {
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("train: learning_rate must be > 0");
  }
  switch (config.optimizer) {
    case OptimizerKind::kSgd:
      return std::make_unique<SgdOptimizer>(config.learning_rate, config.momentum);
    case OptimizerKind::kAdam:
      return std::make_unique<AdamOptimizer>(config.learning_rate);
  }
  throw std::logic_error("train: unreachable optimizer kind");
}

ValueId cross_entropy_loss(Tape& t, ValueId logits, std::span<const int> labels) {
  const DenseMatrix& lv = t.value(logits);
  if (lv.rows() != labels.size()) {
    throw std::invalid_argument("cross_entropy_loss: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(lv.rows()) + " logit rows");
  }
  DenseMatrix onehot(lv.rows(), lv.cols(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    onehot(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  const ValueId logsm = t.log_softmax(logits);
  const ValueId picked = t.sum_all(t.mul(logsm, t.constant(std::move(onehot))));
  return t.scale(picked, -1.0 / static_cast<double>(lv.rows()));
}

std::vector<DenseMatrix> collect_grads(const Tape& t, std::span<const BoundParam> bound) {
  std::vector<DenseMatrix> out;
  out.reserve(bound.size());
  for (const BoundParam& b : bound) out.push_back(t.grad(b.id));
  return out;
}

TrainResult train_supervised(ProbabilisticClassifier& model, const SamplePool& pool,
                             std::span<const std::size_t> labeled_indices,
                             std::span<const int> labels, const TrainConfig& config) {
  if (labeled_indices.empty()) {
    throw std::invalid_argument(
        "train_supervised: labeled set is empty (cold-start degenerate case)");
  }
  if (labeled_indices.size() != labels.size()) {
    throw std::invalid_argument("train_supervised: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(labeled_indices.size()) +
                                " indices");
  }
  if (config.epochs < 1) throw std::invalid_argument("train_supervised: epochs must be >= 1");
  if (config.batch_size < 1) {
    throw std::invalid_argument("train_supervised: batch_size must be >= 1");
  }

  RngStream rng(config.seed);
  auto optimizer = ParamOptimizer::create(config);

  std::vector<std::size_t> order(labeled_indices.begin(), labeled_indices.end());
  std::vector<int> label_of(pool.size());
  for (std::size_t i = 0; i < labeled_indices.size(); ++i) {
    label_of[labeled_indices[i]] = labels[i];
  }

  double last_epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    RngStream shuffle_rng = rng.split(epoch * 2 + 1);
    RngStream mask_rng = rng.split(epoch * 2 + 2);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size, ++batches) {
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + lo, hi - lo);
      std::vector<int> batch_labels(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) batch_labels[i] = label_of[batch[i]];

      Tape t;
      const ValueId x = t.constant(gather_rows(pool.features, batch));
      std::vector<BoundParam> bound;
      const ValueId logits = model.forward_logits(t, x, &mask_rng, &bound);
      const ValueId loss = cross_entropy_loss(t, logits, batch_labels);
      t.backward(loss);

      std::vector<DenseMatrix*> params;
      params.reserve(bound.size());
      for (const BoundParam& b : bound) params.push_back(b.param);
      const std::vector<DenseMatrix> grads = collect_grads(t, bound);
      optimizer->step(params, grads);
      epoch_loss += t.value(loss)(0, 0);
    }
    last_epoch_loss = epoch_loss / static_cast<double>(batches);
    if (!std::isfinite(last_epoch_loss)) {
      throw std::runtime_error("train_supervised: non-finite loss at epoch " +
                               std::to_string(epoch + 1));
    }
  }
  return {last_epoch_loss};
}

}  // namespace albench
