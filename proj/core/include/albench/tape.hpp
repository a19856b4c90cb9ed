#pragma once

#include <cstdint>
#include <vector>

#include "albench/matrix.hpp"

namespace albench {

using ValueId = std::int32_t;

/// Geometry of a strided 2D convolution over channels-last feature maps.
struct ConvGeom {
  std::size_t height = 0, width = 0, channels = 0;
  std::size_t kernel = 0, stride = 1, pad = 0;

  std::size_t out_height() const { return (height + 2 * pad - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * pad - kernel) / stride + 1; }
  std::size_t patch_len() const { return kernel * kernel * channels; }
};

/// Reverse-mode tape over dense matrices with an explicit, closed set of
/// primitives. Nodes are appended in evaluation order, which is already a
/// topological order, so backward() is a single reverse sweep.
///
/// Single-threaded per tape; independent tapes may run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. Constants never receive adjoints.
  ValueId leaf(DenseMatrix value, bool requires_grad);
  ValueId constant(DenseMatrix value) { return leaf(std::move(value), false); }

  // Primitives.
  ValueId matmul(ValueId a, ValueId b);
  ValueId transpose(ValueId a);
  ValueId add(ValueId a, ValueId b);        // same shape
  ValueId sub(ValueId a, ValueId b);        // same shape
  ValueId mul(ValueId a, ValueId b);        // Hadamard, same shape
  ValueId scale(ValueId a, double c);
  ValueId add_scalar(ValueId a, double c);
  ValueId add_rowvec(ValueId a, ValueId v);  // v is 1 x cols, broadcast over rows
  ValueId div_rowvec(ValueId a, ValueId v);  // elementwise a / v, broadcast
  ValueId relu(ValueId a);
  ValueId tanh_elem(ValueId a);
  ValueId sqrt_elem(ValueId a);
  /// Fused numerically-stable row-wise log-softmax.
  ValueId log_softmax(ValueId a);
  /// Applies a precomputed mask (inverted-dropout scaling baked into the
  /// mask entries). The mask is a constant: reproducibility lives with the
  /// caller-supplied RngStream that drew it.
  ValueId dropout(ValueId a, DenseMatrix mask);
  ValueId l2_normalize_rows(ValueId a);
  ValueId mean_all(ValueId a);   // 1x1
  ValueId sum_all(ValueId a);    // 1x1
  ValueId row_sum(ValueId a);    // rows x 1
  ValueId col_mean(ValueId a);   // 1 x cols
  ValueId concat_rows(ValueId a, ValueId b);
  ValueId concat_cols(ValueId a, ValueId b);
  ValueId slice_rows(ValueId a, std::size_t begin, std::size_t count);
  ValueId reshape(ValueId a, std::size_t rows, std::size_t cols);
  /// Extracts conv patches: (B x H*W*C) -> (B*OH*OW x k*k*C), channels-last.
  ValueId im2col(ValueId a, const ConvGeom& geom);

  const DenseMatrix& value(ValueId id) const { return nodes_[id].value; }
  /// Adjoint of a node; valid after backward(). Empty if the node is not on
  /// a gradient path.
  const DenseMatrix& grad(ValueId id) const { return nodes_[id].grad; }
  bool requires_grad(ValueId id) const { return nodes_[id].requires_grad; }
  std::size_t num_nodes() const { return nodes_.size(); }

  /// Reverse sweep from a scalar (1x1) node. Throws std::invalid_argument on
  /// a non-scalar loss. May be called repeatedly; adjoints are reset each
  /// call.
  void backward(ValueId loss);

 private:
  enum class Op : std::uint8_t {
    kLeaf, kMatMul, kTranspose, kAdd, kSub, kMul, kScale, kAddScalar,
    kAddRowVec, kDivRowVec, kRelu, kTanh, kSqrt, kLogSoftmax, kDropout,
    kL2NormalizeRows, kMeanAll, kSumAll, kRowSum, kColMean, kConcatRows,
    kConcatCols, kSliceRows, kReshape, kIm2Col,
  };

  struct Node {
    Op op = Op::kLeaf;
    ValueId a = -1, b = -1;
    bool requires_grad = false;
    double scalar = 0.0;
    DenseMatrix value;
    DenseMatrix grad;
    DenseMatrix aux;  // dropout mask / cached softmax
    ConvGeom geom;
  };

  ValueId push(Node n);
  DenseMatrix& grad_buf(ValueId id);
  void backward_node(std::size_t i);

  std::vector<Node> nodes_;
};

}  // namespace albench
