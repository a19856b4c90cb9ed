#include "albench/encoder.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace albench {

std::vector<const DenseMatrix*> Encoder::params() const {
  auto mut = const_cast<Encoder*>(this)->params();
  return {mut.begin(), mut.end()};
}

DenseMatrix draw_dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& rng) {
  DenseMatrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask.data()[k] = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

namespace {

const char* act_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

ValueId apply_activation(Tape& t, ValueId x, Activation a) {
  return a == Activation::kRelu ? t.relu(x) : t.tanh_elem(x);
}

ValueId maybe_dropout(Tape& t, ValueId x, double rate, RngStream* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  const DenseMatrix& v = t.value(x);
  return t.dropout(x, draw_dropout_mask(v.rows(), v.cols(), rate, *rng));
}

// He-style init for weight matrices feeding an activation.
void init_weight(DenseMatrix& w, std::size_t fan_in, RngStream& rng) {
  w.fill_normal(rng, 0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
}

class IdentityEncoder final : public Encoder {
 public:
  explicit IdentityEncoder(std::size_t dim) : dim_(dim) {}

  std::unique_ptr<Encoder> clone() const override {
    return std::make_unique<IdentityEncoder>(*this);
  }
  std::size_t input_dim() const override { return dim_; }
  std::size_t embedding_dim() const override { return dim_; }

  ValueId forward(Tape& t, ValueId input, double dropout_rate, RngStream* mask_rng,
                  std::vector<BoundParam>*) override {
    return maybe_dropout(t, input, dropout_rate, mask_rng);
  }

  std::vector<DenseMatrix*> params() override { return {}; }
  void init(RngStream&) override {}
  std::string arch_string() const override { return "identity " + std::to_string(dim_); }

 private:
  std::size_t dim_;
};

class MlpEncoder final : public Encoder {
 public:
  MlpEncoder(std::size_t input_dim, std::vector<std::size_t> hidden, Activation act)
      : input_dim_(input_dim), hidden_(std::move(hidden)), act_(act) {
    if (hidden_.empty()) throw std::invalid_argument("mlp encoder needs at least one hidden dim");
    std::size_t in = input_dim_;
    for (std::size_t h : hidden_) {
      weights_.emplace_back(in, h);
      biases_.emplace_back(1, h);
      in = h;
    }
  }

  std::unique_ptr<Encoder> clone() const override { return std::make_unique<MlpEncoder>(*this); }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t embedding_dim() const override { return hidden_.back(); }

  ValueId forward(Tape& t, ValueId input, double dropout_rate, RngStream* mask_rng,
                  std::vector<BoundParam>* bound) override {
    ValueId x = input;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      const ValueId w = t.leaf(weights_[l], bound != nullptr);
      const ValueId b = t.leaf(biases_[l], bound != nullptr);
      if (bound) {
        bound->push_back({&weights_[l], w});
        bound->push_back({&biases_[l], b});
      }
      x = t.add_rowvec(t.matmul(x, w), b);
      x = apply_activation(t, x, act_);
      x = maybe_dropout(t, x, dropout_rate, mask_rng);
    }
    return x;
  }

  std::vector<DenseMatrix*> params() override {
    std::vector<DenseMatrix*> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.push_back(&weights_[l]);
      out.push_back(&biases_[l]);
    }
    return out;
  }

  void init(RngStream& rng) override {
    std::size_t in = input_dim_;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      init_weight(weights_[l], in, rng);
      biases_[l].fill(0.0);
      in = hidden_[l];
    }
  }

  std::string arch_string() const override {
    std::ostringstream os;
    os << "mlp " << input_dim_;
    for (std::size_t h : hidden_) os << ' ' << h;
    os << ' ' << act_name(act_);
    return os.str();
  }

 private:
  std::size_t input_dim_;
  std::vector<std::size_t> hidden_;
  Activation act_;
  std::vector<DenseMatrix> weights_;  // stored (in x out): logits row-batch friendly
  std::vector<DenseMatrix> biases_;
};

// Three strided 3x3 conv blocks over channels-last maps, then a linear
// projection of the flattened final map to the embedding.
class ConvEncoder final : public Encoder {
 public:
  ConvEncoder(std::size_t height, std::size_t width, std::vector<std::size_t> channels,
              std::size_t embedding_dim, Activation act)
      : height_(height), width_(width), channels_(std::move(channels)),
        embedding_dim_(embedding_dim), act_(act) {
    if (channels_.empty()) throw std::invalid_argument("conv encoder needs channel counts");
    std::size_t h = height_, w = width_, in_c = 1;
    for (std::size_t c : channels_) {
      ConvGeom g{h, w, in_c, 3, 2, 1};
      geoms_.push_back(g);
      kernels_.emplace_back(g.patch_len(), c);
      biases_.emplace_back(1, c);
      h = g.out_height();
      w = g.out_width();
      in_c = c;
    }
    flat_dim_ = h * w * in_c;
    proj_w_ = DenseMatrix(flat_dim_, embedding_dim_);
    proj_b_ = DenseMatrix(1, embedding_dim_);
  }

  std::unique_ptr<Encoder> clone() const override { return std::make_unique<ConvEncoder>(*this); }
  std::size_t input_dim() const override { return height_ * width_; }
  std::size_t embedding_dim() const override { return embedding_dim_; }

  ValueId forward(Tape& t, ValueId input, double dropout_rate, RngStream* mask_rng,
                  std::vector<BoundParam>* bound) override {
    const std::size_t batch = t.value(input).rows();
    ValueId x = input;
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
      const ValueId w = t.leaf(kernels_[l], bound != nullptr);
      const ValueId b = t.leaf(biases_[l], bound != nullptr);
      if (bound) {
        bound->push_back({&kernels_[l], w});
        bound->push_back({&biases_[l], b});
      }
      const ConvGeom& g = geoms_[l];
      ValueId cols = t.im2col(x, g);
      ValueId conv = t.add_rowvec(t.matmul(cols, w), b);
      conv = apply_activation(t, conv, act_);
      x = t.reshape(conv, batch, g.out_height() * g.out_width() * kernels_[l].cols());
    }
    const ValueId pw = t.leaf(proj_w_, bound != nullptr);
    const ValueId pb = t.leaf(proj_b_, bound != nullptr);
    if (bound) {
      bound->push_back({&proj_w_, pw});
      bound->push_back({&proj_b_, pb});
    }
    ValueId h = apply_activation(t, t.add_rowvec(t.matmul(x, pw), pb), act_);
    return maybe_dropout(t, h, dropout_rate, mask_rng);
  }

  std::vector<DenseMatrix*> params() override {
    std::vector<DenseMatrix*> out;
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
      out.push_back(&kernels_[l]);
      out.push_back(&biases_[l]);
    }
    out.push_back(&proj_w_);
    out.push_back(&proj_b_);
    return out;
  }

  void init(RngStream& rng) override {
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
      init_weight(kernels_[l], geoms_[l].patch_len(), rng);
      biases_[l].fill(0.0);
    }
    init_weight(proj_w_, flat_dim_, rng);
    proj_b_.fill(0.0);
  }

  std::string arch_string() const override {
    std::ostringstream os;
    os << "conv " << height_ << ' ' << width_;
    for (std::size_t c : channels_) os << ' ' << c;
    os << ' ' << embedding_dim_ << ' ' << act_name(act_);
    return os.str();
  }

 private:
  std::size_t height_, width_;
  std::vector<std::size_t> channels_;
  std::size_t embedding_dim_;
  Activation act_;
  std::vector<ConvGeom> geoms_;
  std::vector<DenseMatrix> kernels_;
  std::vector<DenseMatrix> biases_;
  std::size_t flat_dim_ = 0;
  DenseMatrix proj_w_, proj_b_;
};

Activation parse_act(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

}  // namespace

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec) {
  switch (spec.kind) {
    case EncoderSpec::Kind::kIdentity:
      return std::make_unique<IdentityEncoder>(spec.input_dim);
    case EncoderSpec::Kind::kMlp:
      return std::make_unique<MlpEncoder>(spec.input_dim, spec.hidden, spec.activation);
    case EncoderSpec::Kind::kConv:
      return std::make_unique<ConvEncoder>(spec.image_height, spec.image_width,
                                           spec.conv_channels, spec.embedding_dim,
                                           spec.activation);
  }
  throw std::logic_error("make_encoder: unreachable");
}

std::unique_ptr<Encoder> make_encoder_from_arch(const std::string& arch) {
  std::istringstream is(arch);
  std::string kind;
  is >> kind;
  if (kind == "identity") {
    std::size_t dim = 0;
    is >> dim;
    return std::make_unique<IdentityEncoder>(dim);
  }
  if (kind == "mlp") {
    std::vector<std::string> tok;
    std::string t;
    while (is >> t) tok.push_back(t);
    if (tok.size() < 3) throw std::invalid_argument("bad mlp arch: " + arch);
    const std::size_t input = std::stoul(tok[0]);
    std::vector<std::size_t> hidden;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) hidden.push_back(std::stoul(tok[i]));
    return std::make_unique<MlpEncoder>(input, hidden, parse_act(tok.back()));
  }
  if (kind == "conv") {
    std::vector<std::string> tok;
    std::string t;
    while (is >> t) tok.push_back(t);
    if (tok.size() < 5) throw std::invalid_argument("bad conv arch: " + arch);
    const std::size_t h = std::stoul(tok[0]), w = std::stoul(tok[1]);
    std::vector<std::size_t> channels;
    for (std::size_t i = 2; i + 2 < tok.size(); ++i) channels.push_back(std::stoul(tok[i]));
    const std::size_t emb = std::stoul(tok[tok.size() - 2]);
    return std::make_unique<ConvEncoder>(h, w, channels, emb, parse_act(tok.back()));
  }
  throw std::invalid_argument("unknown encoder arch '" + arch + "'");
}

}  // namespace albench
