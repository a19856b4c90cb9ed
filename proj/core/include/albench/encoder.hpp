#pragma once

#include <memory>
#include <string>
#include <vector>

#include "albench/rng.hpp"
#include "albench/tape.hpp"

namespace albench {

/// A parameter leaf registered on a tape during one forward pass.
struct BoundParam {
  DenseMatrix* param = nullptr;
  ValueId id = -1;
};

/// Feature encoder producing the penultimate embedding h(x).
///
/// forward() registers this encoder's parameters as tape leaves. When
/// `bound` is non-null the leaves require gradients and the (param, id)
/// pairs are appended so the caller can read adjoints and apply updates.
/// Dropout fires only when mask_rng is non-null and dropout_rate > 0.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual std::unique_ptr<Encoder> clone() const = 0;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t embedding_dim() const = 0;

  virtual ValueId forward(Tape& t, ValueId input, double dropout_rate, RngStream* mask_rng,
                          std::vector<BoundParam>* bound) = 0;

  virtual std::vector<DenseMatrix*> params() = 0;
  std::vector<const DenseMatrix*> params() const;

  virtual void init(RngStream& rng) = 0;

  /// Architecture line for checkpoints, e.g. "mlp 32 64 32 relu".
  virtual std::string arch_string() const = 0;
};

enum class Activation { kRelu, kTanh };

struct EncoderSpec {
  enum class Kind { kIdentity, kMlp, kConv } kind = Kind::kMlp;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {64, 32};   // mlp: embedding = hidden.back()
  Activation activation = Activation::kRelu;
  // conv:
  std::size_t image_height = 0, image_width = 0;
  std::vector<std::size_t> conv_channels = {8, 16, 32};
  std::size_t embedding_dim = 64;  // conv only; mlp derives it from hidden
};

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec);

/// Rebuilds an encoder from its arch_string().
std::unique_ptr<Encoder> make_encoder_from_arch(const std::string& arch);

/// Inverted-dropout mask: entries are 0 with probability rate, else
/// 1/(1-rate). Drawing is row-major in a fixed order for reproducibility.
DenseMatrix draw_dropout_mask(std::size_t rows, std::size_t cols, double rate, RngStream& rng);

}  // namespace albench
