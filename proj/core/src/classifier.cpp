#include "albench/classifier.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace albench {

ProbabilisticClassifier::ProbabilisticClassifier(std::unique_ptr<Encoder> encoder,
                                                 std::size_t num_classes, double dropout_rate)
    : encoder_(std::move(encoder)),
      head_w_(num_classes, 0),
      head_b_(1, num_classes, 0.0),
      dropout_rate_(dropout_rate) {
  if (num_classes < 2) throw std::invalid_argument("classifier: num_classes must be >= 2");
  if (dropout_rate_ < 0.0 || dropout_rate_ >= 1.0) {
    throw std::invalid_argument("classifier: dropout_rate must be in [0,1)");
  }
  head_w_ = DenseMatrix(num_classes, encoder_->embedding_dim(), 0.0);
}

ProbabilisticClassifier::ProbabilisticClassifier(const ProbabilisticClassifier& other)
    : encoder_(other.encoder_->clone()),
      head_w_(other.head_w_),
      head_b_(other.head_b_),
      dropout_rate_(other.dropout_rate_) {}

ProbabilisticClassifier& ProbabilisticClassifier::operator=(
    const ProbabilisticClassifier& other) {
  if (this != &other) {
    encoder_ = other.encoder_->clone();
    head_w_ = other.head_w_;
    head_b_ = other.head_b_;
    dropout_rate_ = other.dropout_rate_;
  }
  return *this;
}

void ProbabilisticClassifier::init(RngStream& rng) {
  encoder_->init(rng);
  init_head();
}

void ProbabilisticClassifier::init_head() {
  head_w_.fill(0.0);
  head_b_.fill(0.0);
}

std::vector<DenseMatrix*> ProbabilisticClassifier::all_params() {
  std::vector<DenseMatrix*> out = encoder_->params();
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

ValueId ProbabilisticClassifier::forward_logits(Tape& t, ValueId input, RngStream* mask_rng,
                                                std::vector<BoundParam>* bound) {
  const ValueId h = encoder_->forward(t, input, dropout_rate_, mask_rng, bound);
  const ValueId w = t.leaf(head_w_, bound != nullptr);
  const ValueId b = t.leaf(head_b_, bound != nullptr);
  if (bound) {
    bound->push_back({&head_w_, w});
    bound->push_back({&head_b_, b});
  }
  return t.add_rowvec(t.matmul(h, t.transpose(w)), b);
}

DenseMatrix ProbabilisticClassifier::logits(const DenseMatrix& x) const {
  Tape t;
  auto* self = const_cast<ProbabilisticClassifier*>(this);
  const ValueId out = self->forward_logits(t, t.constant(x), nullptr, nullptr);
  return t.value(out);
}

DenseMatrix ProbabilisticClassifier::predict_proba(const DenseMatrix& x) const {
  return softmax_rows(logits(x));
}

DenseMatrix ProbabilisticClassifier::embed(const DenseMatrix& x) const {
  Tape t;
  auto* self = const_cast<ProbabilisticClassifier*>(this);
  const ValueId h = self->encoder_->forward(t, t.constant(x), 0.0, nullptr, nullptr);
  return t.value(h);
}

namespace {

// Predictions run in fixed-size row chunks to bound tape memory on large
// pools. The chunk size is part of the deterministic contract: stochastic
// masks are drawn from split(pass) then split(chunk_index).
constexpr std::size_t kPredictChunk = 512;

using ChunkFn = std::function<DenseMatrix(std::size_t lo, std::size_t hi)>;

std::vector<DenseMatrix> stochastic_predict_chunked(ProbabilisticClassifier& model,
                                                    const ChunkFn& chunk, std::size_t n,
                                                    std::size_t passes, const RngStream& rng) {
  if (model.dropout_rate() <= 0.0) {
    throw std::invalid_argument(
        "stochastic_predict: dropout_rate is 0, so all passes agree and the BALD mutual "
        "information degenerates to 0; configure dropout > 0");
  }
  if (passes < 2) throw std::invalid_argument("stochastic_predict: passes must be >= 2");
  std::vector<DenseMatrix> out(passes, DenseMatrix(n, model.num_classes()));
  for (std::size_t lo = 0, ci = 0; lo < n; lo += kPredictChunk, ++ci) {
    const std::size_t hi = std::min(n, lo + kPredictChunk);
    const DenseMatrix x = chunk(lo, hi);
    for (std::size_t p = 0; p < passes; ++p) {
      RngStream mask_rng = rng.split(p).split(ci);
      Tape t;
      const ValueId logit = model.forward_logits(t, t.constant(x), &mask_rng, nullptr);
      const DenseMatrix probs = softmax_rows(t.value(logit));
      std::copy(probs.data(), probs.data() + probs.size(), out[p].data() + lo * probs.cols());
    }
  }
  return out;
}

}  // namespace

std::vector<DenseMatrix> ProbabilisticClassifier::stochastic_predict(const DenseMatrix& x,
                                                                     std::size_t passes,
                                                                     const RngStream& rng) const {
  auto* self = const_cast<ProbabilisticClassifier*>(this);
  const ChunkFn chunk = [&x](std::size_t lo, std::size_t hi) {
    DenseMatrix m(hi - lo, x.cols());
    std::copy(x.data() + lo * x.cols(), x.data() + hi * x.cols(), m.data());
    return m;
  };
  return stochastic_predict_chunked(*self, chunk, x.rows(), passes, rng);
}

std::vector<double> ProbabilisticClassifier::input_gradient(std::span<const double> sample,
                                                            std::size_t target_class) const {
  if (target_class >= num_classes()) {
    throw std::invalid_argument("input_gradient: class " + std::to_string(target_class) +
                                " outside 0.." + std::to_string(num_classes() - 1));
  }
  Tape t;
  auto* self = const_cast<ProbabilisticClassifier*>(this);
  const ValueId x =
      t.leaf(DenseMatrix(1, sample.size(), std::vector<double>(sample.begin(), sample.end())),
             /*requires_grad=*/true);
  const ValueId logit = self->forward_logits(t, x, nullptr, nullptr);
  DenseMatrix pick(1, num_classes(), 0.0);
  pick(0, target_class) = 1.0;
  const ValueId scalar = t.sum_all(t.mul(logit, t.constant(std::move(pick))));
  t.backward(scalar);
  const DenseMatrix& g = t.grad(x);
  return {g.data(), g.data() + g.size()};
}

std::vector<double> ProbabilisticClassifier::last_layer_gradient(std::span<const double> sample,
                                                                 int pseudo_label) const {
  const std::size_t k = num_classes();
  if (pseudo_label < 0 || static_cast<std::size_t>(pseudo_label) >= k) {
    throw std::invalid_argument("last_layer_gradient: pseudo-label " +
                                std::to_string(pseudo_label) + " outside 0.." +
                                std::to_string(k - 1));
  }
  const DenseMatrix x(1, sample.size(), std::vector<double>(sample.begin(), sample.end()));
  const DenseMatrix h = embed(x);
  const DenseMatrix p = predict_proba(x);
  const std::size_t e = h.cols();
  std::vector<double> g(k * e);
  for (std::size_t c = 0; c < k; ++c) {
    const double coeff = p(0, c) - (static_cast<std::size_t>(pseudo_label) == c ? 1.0 : 0.0);
    for (std::size_t j = 0; j < e; ++j) g[c * e + j] = coeff * h(0, j);
  }
  return g;
}

DenseMatrix gather_rows(const DenseMatrix& features, std::span<const std::size_t> indices) {
  DenseMatrix out(indices.size(), features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

DenseMatrix predict_proba(const ProbabilisticClassifier& model, const SamplePool& pool,
                          std::span<const std::size_t> indices) {
  DenseMatrix out(indices.size(), model.num_classes());
  for (std::size_t lo = 0; lo < indices.size(); lo += kPredictChunk) {
    const std::size_t hi = std::min(indices.size(), lo + kPredictChunk);
    const DenseMatrix probs =
        model.predict_proba(gather_rows(pool.features, indices.subspan(lo, hi - lo)));
    std::copy(probs.data(), probs.data() + probs.size(), out.data() + lo * probs.cols());
  }
  return out;
}

std::vector<DenseMatrix> stochastic_predict(const ProbabilisticClassifier& model,
                                            const SamplePool& pool,
                                            std::span<const std::size_t> indices,
                                            std::size_t passes, const RngStream& rng) {
  auto* mut = const_cast<ProbabilisticClassifier*>(&model);
  const ChunkFn chunk = [&](std::size_t lo, std::size_t hi) {
    return gather_rows(pool.features, indices.subspan(lo, hi - lo));
  };
  return stochastic_predict_chunked(*mut, chunk, indices.size(), passes, rng);
}

}  // namespace albench
