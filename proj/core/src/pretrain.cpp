#include "albench/pretrain.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace albench {

SslMethod parse_ssl_method(const std::string& name) {
  if (name == "simclr") return SslMethod::kSimclr;
  if (name == "moco_v2") return SslMethod::kMocoV2;
  if (name == "byol") return SslMethod::kByol;
  if (name == "swav") return SslMethod::kSwav;
  if (name == "barlow") return SslMethod::kBarlow;
  throw std::invalid_argument("unknown ssl method '" + name +
                              "' (expected simclr|moco_v2|byol|swav|barlow)");
}

std::string ssl_method_name(SslMethod method) {
  switch (method) {
    case SslMethod::kSimclr: return "simclr";
    case SslMethod::kMocoV2: return "moco_v2";
    case SslMethod::kByol: return "byol";
    case SslMethod::kSwav: return "swav";
    case SslMethod::kBarlow: return "barlow";
  }
  return "?";
}

namespace {

// Linear -> activation -> Linear projection head (no final activation).
class ProjectionHead {
 public:
  ProjectionHead(std::size_t in_dim, std::size_t out_dim)
      : w1_(in_dim, in_dim), b1_(1, in_dim), w2_(in_dim, out_dim), b2_(1, out_dim) {}

  void init(RngStream& rng) {
    w1_.fill_normal(rng, 0.0, std::sqrt(2.0 / static_cast<double>(w1_.rows())));
    b1_.fill_normal(rng, 0.0, 0.01);
    w2_.fill_normal(rng, 0.0, std::sqrt(2.0 / static_cast<double>(w2_.rows())));
    // nonzero bias keeps rows off exact zero when relu kills an input,
    // which the cosine losses reject
    b2_.fill_normal(rng, 0.0, 0.01);
  }

  ValueId forward(Tape& t, ValueId x, std::vector<BoundParam>* bound) {
    const ValueId w1 = t.leaf(w1_, bound != nullptr);
    const ValueId b1 = t.leaf(b1_, bound != nullptr);
    const ValueId w2 = t.leaf(w2_, bound != nullptr);
    const ValueId b2 = t.leaf(b2_, bound != nullptr);
    if (bound) {
      bound->push_back({&w1_, w1});
      bound->push_back({&b1_, b1});
      bound->push_back({&w2_, w2});
      bound->push_back({&b2_, b2});
    }
    const ValueId h = t.relu(t.add_rowvec(t.matmul(x, w1), b1));
    return t.add_rowvec(t.matmul(h, w2), b2);
  }

  std::vector<DenseMatrix*> params() { return {&w1_, &b1_, &w2_, &b2_}; }

 private:
  DenseMatrix w1_, b1_, w2_, b2_;
};

DenseMatrix stack_views(const ViewPair& views) {
  DenseMatrix out(views.view_a.rows() + views.view_b.rows(), views.view_a.cols());
  std::copy(views.view_a.data(), views.view_a.data() + views.view_a.size(), out.data());
  std::copy(views.view_b.data(), views.view_b.data() + views.view_b.size(),
            out.data() + views.view_a.size());
  return out;
}

DenseMatrix l2_normalize_rows_plain(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < out.cols(); ++j) sq += out(i, j) * out(i, j);
    const double norm = std::sqrt(sq);
    if (norm <= 0.0) {
      throw std::runtime_error("pretrain: zero-norm embedding row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) /= norm;
  }
  return out;
}

}  // namespace

struct PretrainSession::Impl {
  Encoder& encoder;
  const SamplePool& pool;
  PretrainConfig config;

  ProjectionHead projection;
  std::unique_ptr<ProjectionHead> predictor;        // byol
  std::unique_ptr<Encoder> momentum_encoder;        // moco / byol
  std::unique_ptr<ProjectionHead> momentum_proj;    // moco / byol
  std::unique_ptr<NegativeQueue> negative_queue;    // moco
  std::unique_ptr<PrototypeBank> prototypes;        // swav
  std::unique_ptr<ParamOptimizer> optimizer;

  Impl(Encoder& enc, const SamplePool& p, const PretrainConfig& cfg)
      : encoder(enc), pool(p), config(cfg),
        projection(enc.embedding_dim(), cfg.projection_dim) {
    RngStream rng = RngStream(cfg.seed).split(0x535354);  // session init stream
    projection.init(rng);

    switch (config.method) {
      case SslMethod::kMocoV2: {
        momentum_encoder = encoder.clone();
        momentum_proj = std::make_unique<ProjectionHead>(projection);
        negative_queue = std::make_unique<NegativeQueue>(config.moco_queue_capacity);
        break;
      }
      case SslMethod::kByol: {
        predictor = std::make_unique<ProjectionHead>(config.projection_dim,
                                                     config.projection_dim);
        predictor->init(rng);
        momentum_encoder = encoder.clone();
        momentum_proj = std::make_unique<ProjectionHead>(projection);
        break;
      }
      case SslMethod::kSwav: {
        prototypes = std::make_unique<PrototypeBank>();
        prototypes->prototypes = DenseMatrix(config.swav_prototypes, config.projection_dim);
        prototypes->prototypes.fill_normal(rng, 0.0, 1.0);
        prototypes->renormalize_rows();
        break;
      }
      default:
        break;
    }

    TrainConfig opt_cfg;
    opt_cfg.optimizer = config.optimizer;
    opt_cfg.learning_rate = config.learning_rate;
    optimizer = ParamOptimizer::create(opt_cfg);
  }

  MomentumPair momentum_pair(double coefficient) {
    MomentumPair pair;
    pair.coefficient = coefficient;
    for (DenseMatrix* p : encoder.params()) pair.online.push_back(p);
    for (DenseMatrix* p : projection.params()) pair.online.push_back(p);
    for (DenseMatrix* p : momentum_encoder->params()) pair.momentum.push_back(p);
    for (DenseMatrix* p : momentum_proj->params()) pair.momentum.push_back(p);
    return pair;
  }

  // Momentum branch evaluated value-only on its own tape.
  DenseMatrix momentum_forward(const DenseMatrix& input) {
    Tape t;
    const ValueId h = momentum_encoder->forward(t, t.constant(input), 0.0, nullptr, nullptr);
    const ValueId z = momentum_proj->forward(t, h, nullptr);
    return t.value(z);
  }

  void apply_step(Tape& t, ValueId loss, std::vector<BoundParam>& bound) {
    t.backward(loss);
    std::vector<DenseMatrix*> params;
    params.reserve(bound.size());
    for (const BoundParam& b : bound) params.push_back(b.param);
    optimizer->step(params, collect_grads(t, bound));
  }

  double step(std::span<const std::size_t> batch, const RngStream& view_rng) {
    const ViewPair views = make_view_pair(config.augment, pool, batch, view_rng);
    const std::size_t b = batch.size();

    switch (config.method) {
      case SslMethod::kSimclr: {
        Tape t;
        std::vector<BoundParam> bound;
        const ValueId x = t.constant(stack_views(views));
        const ValueId h = encoder.forward(t, x, 0.0, nullptr, &bound);
        const ValueId z = projection.forward(t, h, &bound);
        const ValueId loss = nt_xent_loss(t, z, config.temperature);
        const double value = t.value(loss)(0, 0);
        apply_step(t, loss, bound);
        return value;
      }
      case SslMethod::kMocoV2: {
        const DenseMatrix negatives = negative_queue->snapshot();
        const DenseMatrix keys = l2_normalize_rows_plain(momentum_forward(stack_views(views)));
        // keys rows [0,b) are momentum(view_a), [b,2b) momentum(view_b)
        DenseMatrix keys_a(b, keys.cols()), keys_b(b, keys.cols());
        std::copy(keys.data(), keys.data() + b * keys.cols(), keys_a.data());
        std::copy(keys.data() + b * keys.cols(), keys.data() + 2 * b * keys.cols(),
                  keys_b.data());

        Tape t;
        std::vector<BoundParam> bound;
        const ValueId x = t.constant(stack_views(views));
        const ValueId h = encoder.forward(t, x, 0.0, nullptr, &bound);
        const ValueId z = projection.forward(t, h, &bound);
        const ValueId q_a = t.slice_rows(z, 0, b);
        const ValueId q_b = t.slice_rows(z, b, b);
        // Symmetrized: each view queries the other view's momentum key.
        const ValueId loss_ab = info_nce_loss(t, q_a, keys_b, negatives, config.temperature);
        const ValueId loss_ba = info_nce_loss(t, q_b, keys_a, negatives, config.temperature);
        const ValueId loss = t.scale(t.add(loss_ab, loss_ba), 0.5);
        const double value = t.value(loss)(0, 0);
        apply_step(t, loss, bound);

        negative_queue->push(keys_b);
        negative_queue->push(keys_a);
        MomentumPair pair = momentum_pair(config.moco_momentum);
        momentum_update(pair);
        return value;
      }
      case SslMethod::kByol: {
        // Target branch sees the swapped stack so the mean over 2B rows
        // covers both view orderings.
        ViewPair swapped;
        swapped.view_a = views.view_b;
        swapped.view_b = views.view_a;
        const DenseMatrix targets = momentum_forward(stack_views(swapped));

        Tape t;
        std::vector<BoundParam> bound;
        const ValueId x = t.constant(stack_views(views));
        const ValueId h = encoder.forward(t, x, 0.0, nullptr, &bound);
        const ValueId z = projection.forward(t, h, &bound);
        const ValueId p = predictor->forward(t, z, &bound);
        const ValueId loss = byol_loss(t, p, targets);
        const double value = t.value(loss)(0, 0);
        apply_step(t, loss, bound);

        MomentumPair pair = momentum_pair(config.byol_momentum);
        momentum_update(pair);
        return value;
      }
      case SslMethod::kSwav: {
        Tape t;
        std::vector<BoundParam> bound;
        const ValueId x = t.constant(stack_views(views));
        const ValueId h = encoder.forward(t, x, 0.0, nullptr, &bound);
        const ValueId z = t.l2_normalize_rows(projection.forward(t, h, &bound));
        const ValueId protos = t.leaf(prototypes->prototypes, true);
        bound.push_back({&prototypes->prototypes, protos});
        const ValueId scores = t.matmul(z, t.transpose(protos));
        const DenseMatrix codes =
            sinkhorn_codes(t.value(scores), config.swav_epsilon, config.swav_sinkhorn_iters);
        const ValueId loss = swav_loss(t, scores, codes, config.temperature);
        const double value = t.value(loss)(0, 0);
        apply_step(t, loss, bound);
        prototypes->renormalize_rows();
        return value;
      }
      case SslMethod::kBarlow: {
        Tape t;
        std::vector<BoundParam> bound;
        const ValueId x = t.constant(stack_views(views));
        const ValueId h = encoder.forward(t, x, 0.0, nullptr, &bound);
        const ValueId z = projection.forward(t, h, &bound);
        const ValueId z_a = t.slice_rows(z, 0, b);
        const ValueId z_b = t.slice_rows(z, b, b);
        const ValueId loss = barlow_twins_loss(t, z_a, z_b, config.barlow_lambda);
        const double value = t.value(loss)(0, 0);
        apply_step(t, loss, bound);
        return value;
      }
    }
    throw std::logic_error("pretrain: unreachable method");
  }
};

PretrainSession::PretrainSession(Encoder& encoder, const SamplePool& pool,
                                 const PretrainConfig& config)
    : impl_(std::make_unique<Impl>(encoder, pool, config)) {}

PretrainSession::~PretrainSession() = default;

double PretrainSession::step(std::span<const std::size_t> batch, const RngStream& view_rng) {
  if (batch.size() < 2) throw std::invalid_argument("pretrain step: batch must have >= 2 samples");
  return impl_->step(batch, view_rng);
}

const NegativeQueue* PretrainSession::queue() const { return impl_->negative_queue.get(); }
const PrototypeBank* PretrainSession::prototype_bank() const { return impl_->prototypes.get(); }

PretrainResult pretrain(Encoder& encoder, const SamplePool& pool, const PretrainConfig& config) {
  if (pool.size() == 0) throw std::invalid_argument("pretrain: pool is empty");
  PretrainResult result;
  if (config.epochs == 0) return result;
  if (pool.size() < 2) throw std::invalid_argument("pretrain: pool must have >= 2 samples");

  PretrainSession session(encoder, pool, config);
  RngStream rng(config.seed);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    RngStream shuffle_rng = rng.split(epoch * 2 + 1);
    const RngStream view_rng = rng.split(epoch * 2 + 2);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t lo = 0; lo + 2 <= order.size(); lo += config.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      if (hi - lo < 2) break;  // contrastive batches need at least a pair
      epoch_loss += session.step({order.data() + lo, hi - lo}, view_rng);
      ++steps;
    }
    const double mean_loss = epoch_loss / static_cast<double>(steps);
    if (!std::isfinite(mean_loss)) {
      throw std::runtime_error("pretrain: non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    result.epoch_losses.push_back(mean_loss);
  }
  result.final_loss = result.epoch_losses.back();

  if (!config.loss_csv_path.empty()) {
    std::ofstream csv(config.loss_csv_path);
    if (!csv) throw std::runtime_error("cannot write loss csv: " + config.loss_csv_path);
    csv << "epoch,loss\n";
    char buf[40];
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%.17g", result.epoch_losses[e]);
      csv << (e + 1) << ',' << buf << '\n';
    }
  }
  return result;
}

}  // namespace albench
