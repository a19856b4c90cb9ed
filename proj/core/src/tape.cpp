#include "albench/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace albench {

namespace {

void require_same_shape(const DenseMatrix& x, const DenseMatrix& y, const char* op) {
  if (!x.same_shape(y)) {
    throw std::invalid_argument(std::string(op) + " shape mismatch: " + x.shape_str() + " vs " +
                                y.shape_str());
  }
}

constexpr double kNormEps = 1e-300;  // guards division; real zero rows are caller errors

}  // namespace

ValueId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(DenseMatrix value, bool requires_grad) {
  Node n;
  n.op = Op::kLeaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  if (va.cols() != vb.rows()) {
    throw std::invalid_argument("matmul shape mismatch: " + va.shape_str() + " x " +
                                vb.shape_str());
  }
  Node n;
  n.op = Op::kMatMul;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = DenseMatrix(va.rows(), vb.cols(), 0.0);
  detail::matmul_into(va, vb, n.value);
  return push(std::move(n));
}

ValueId Tape::transpose(ValueId a) {
  Node n;
  n.op = Op::kTranspose;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = albench::transpose(nodes_[a].value);
  return push(std::move(n));
}

ValueId Tape::add(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  require_same_shape(va, vb, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.value.data()[i] += vb.data()[i];
  return push(std::move(n));
}

ValueId Tape::sub(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  require_same_shape(va, vb, "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.value.data()[i] -= vb.data()[i];
  return push(std::move(n));
}

ValueId Tape::mul(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  require_same_shape(va, vb, "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < vb.size(); ++i) n.value.data()[i] *= vb.data()[i];
  return push(std::move(n));
}

ValueId Tape::scale(ValueId a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.scalar = c;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data()[i] *= c;
  return push(std::move(n));
}

ValueId Tape::add_scalar(ValueId a, double c) {
  Node n;
  n.op = Op::kAddScalar;
  n.a = a;
  n.scalar = c;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data()[i] += c;
  return push(std::move(n));
}

ValueId Tape::add_rowvec(ValueId a, ValueId v) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vv = nodes_[v].value;
  if (vv.rows() != 1 || vv.cols() != va.cols()) {
    throw std::invalid_argument("add_rowvec shape mismatch: " + va.shape_str() + " + " +
                                vv.shape_str());
  }
  Node n;
  n.op = Op::kAddRowVec;
  n.a = a;
  n.b = v;
  n.requires_grad = nodes_[a].requires_grad || nodes_[v].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < va.rows(); ++i)
    for (std::size_t j = 0; j < va.cols(); ++j) n.value(i, j) += vv(0, j);
  return push(std::move(n));
}

ValueId Tape::div_rowvec(ValueId a, ValueId v) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vv = nodes_[v].value;
  if (vv.rows() != 1 || vv.cols() != va.cols()) {
    throw std::invalid_argument("div_rowvec shape mismatch: " + va.shape_str() + " / " +
                                vv.shape_str());
  }
  Node n;
  n.op = Op::kDivRowVec;
  n.a = a;
  n.b = v;
  n.requires_grad = nodes_[a].requires_grad || nodes_[v].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < va.rows(); ++i)
    for (std::size_t j = 0; j < va.cols(); ++j) n.value(i, j) /= vv(0, j);
  return push(std::move(n));
}

ValueId Tape::relu(ValueId a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data()[i] = std::max(0.0, n.value.data()[i]);
  return push(std::move(n));
}

ValueId Tape::tanh_elem(ValueId a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data()[i] = std::tanh(n.value.data()[i]);
  return push(std::move(n));
}

ValueId Tape::sqrt_elem(ValueId a) {
  Node n;
  n.op = Op::kSqrt;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = nodes_[a].value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.data()[i] = std::sqrt(n.value.data()[i]);
  return push(std::move(n));
}

ValueId Tape::log_softmax(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  Node n;
  n.op = Op::kLogSoftmax;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(va.rows(), va.cols());
  n.aux = DenseMatrix(va.rows(), va.cols());  // cached softmax for backward
  for (std::size_t i = 0; i < va.rows(); ++i) {
    double mx = va(i, 0);
    for (std::size_t j = 1; j < va.cols(); ++j) mx = std::max(mx, va(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < va.cols(); ++j) sum += std::exp(va(i, j) - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < va.cols(); ++j) {
      n.value(i, j) = va(i, j) - lse;
      n.aux(i, j) = std::exp(n.value(i, j));
    }
  }
  return push(std::move(n));
}

ValueId Tape::dropout(ValueId a, DenseMatrix mask) {
  const DenseMatrix& va = nodes_[a].value;
  require_same_shape(va, mask, "dropout");
  Node n;
  n.op = Op::kDropout;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = va;
  for (std::size_t i = 0; i < va.size(); ++i) n.value.data()[i] *= mask.data()[i];
  n.aux = std::move(mask);
  return push(std::move(n));
}

ValueId Tape::l2_normalize_rows(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  Node n;
  n.op = Op::kL2NormalizeRows;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(va.rows(), va.cols());
  n.aux = DenseMatrix(va.rows(), 1);  // cached norms
  for (std::size_t i = 0; i < va.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < va.cols(); ++j) sq += va(i, j) * va(i, j);
    const double norm = std::sqrt(sq);
    if (norm < kNormEps) {
      throw std::invalid_argument("l2_normalize_rows: zero-norm row " + std::to_string(i));
    }
    n.aux(i, 0) = norm;
    for (std::size_t j = 0; j < va.cols(); ++j) n.value(i, j) = va(i, j) / norm;
  }
  return push(std::move(n));
}

ValueId Tape::mean_all(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va.data()[i];
  Node n;
  n.op = Op::kMeanAll;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(1, 1, s / static_cast<double>(va.size()));
  return push(std::move(n));
}

ValueId Tape::sum_all(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va.data()[i];
  Node n;
  n.op = Op::kSumAll;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(1, 1, s);
  return push(std::move(n));
}

ValueId Tape::row_sum(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  Node n;
  n.op = Op::kRowSum;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(va.rows(), 1, 0.0);
  for (std::size_t i = 0; i < va.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < va.cols(); ++j) s += va(i, j);
    n.value(i, 0) = s;
  }
  return push(std::move(n));
}

ValueId Tape::col_mean(ValueId a) {
  const DenseMatrix& va = nodes_[a].value;
  Node n;
  n.op = Op::kColMean;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(1, va.cols(), 0.0);
  for (std::size_t i = 0; i < va.rows(); ++i)
    for (std::size_t j = 0; j < va.cols(); ++j) n.value(0, j) += va(i, j);
  for (std::size_t j = 0; j < va.cols(); ++j) n.value(0, j) /= static_cast<double>(va.rows());
  return push(std::move(n));
}

ValueId Tape::concat_rows(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  if (va.cols() != vb.cols()) {
    throw std::invalid_argument("concat_rows column mismatch: " + va.shape_str() + " vs " +
                                vb.shape_str());
  }
  Node n;
  n.op = Op::kConcatRows;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = DenseMatrix(va.rows() + vb.rows(), va.cols());
  std::copy(va.data(), va.data() + va.size(), n.value.data());
  std::copy(vb.data(), vb.data() + vb.size(), n.value.data() + va.size());
  return push(std::move(n));
}

ValueId Tape::concat_cols(ValueId a, ValueId b) {
  const DenseMatrix& va = nodes_[a].value;
  const DenseMatrix& vb = nodes_[b].value;
  if (va.rows() != vb.rows()) {
    throw std::invalid_argument("concat_cols row mismatch: " + va.shape_str() + " vs " +
                                vb.shape_str());
  }
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  n.value = DenseMatrix(va.rows(), va.cols() + vb.cols());
  for (std::size_t i = 0; i < va.rows(); ++i) {
    std::copy(va.row(i).begin(), va.row(i).end(), n.value.row(i).begin());
    std::copy(vb.row(i).begin(), vb.row(i).end(), n.value.row(i).begin() + va.cols());
  }
  return push(std::move(n));
}

ValueId Tape::slice_rows(ValueId a, std::size_t begin, std::size_t count) {
  const DenseMatrix& va = nodes_[a].value;
  if (begin + count > va.rows()) {
    throw std::invalid_argument("slice_rows: [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") outside " + va.shape_str());
  }
  Node n;
  n.op = Op::kSliceRows;
  n.a = a;
  n.scalar = static_cast<double>(begin);
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(count, va.cols(),
                        std::vector<double>(va.data() + begin * va.cols(),
                                            va.data() + (begin + count) * va.cols()));
  return push(std::move(n));
}

ValueId Tape::reshape(ValueId a, std::size_t rows, std::size_t cols) {
  const DenseMatrix& va = nodes_[a].value;
  if (rows * cols != va.size()) {
    throw std::invalid_argument("reshape size mismatch: " + va.shape_str() + " -> (" +
                                std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  Node n;
  n.op = Op::kReshape;
  n.a = a;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(rows, cols, std::vector<double>(va.data(), va.data() + va.size()));
  return push(std::move(n));
}

ValueId Tape::im2col(ValueId a, const ConvGeom& geom) {
  const DenseMatrix& va = nodes_[a].value;
  if (va.cols() != geom.height * geom.width * geom.channels) {
    throw std::invalid_argument("im2col: input cols " + std::to_string(va.cols()) +
                                " do not match geometry " + std::to_string(geom.height) + "x" +
                                std::to_string(geom.width) + "x" + std::to_string(geom.channels));
  }
  const std::size_t oh = geom.out_height(), ow = geom.out_width(), pl = geom.patch_len();
  Node n;
  n.op = Op::kIm2Col;
  n.a = a;
  n.geom = geom;
  n.requires_grad = nodes_[a].requires_grad;
  n.value = DenseMatrix(va.rows() * oh * ow, pl, 0.0);
  for (std::size_t s = 0; s < va.rows(); ++s) {
    const double* in = va.data() + s * va.cols();
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double* patch = n.value.data() + ((s * oh + oy) * ow + ox) * pl;
        for (std::size_t ky = 0; ky < geom.kernel; ++ky) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * geom.stride + ky) - static_cast<std::ptrdiff_t>(geom.pad);
          for (std::size_t kx = 0; kx < geom.kernel; ++kx) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * geom.stride + kx) - static_cast<std::ptrdiff_t>(geom.pad);
            if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(geom.height) ||
                ix >= static_cast<std::ptrdiff_t>(geom.width)) {
              continue;  // zero padding, buffer already zeroed
            }
            const double* src = in + (static_cast<std::size_t>(iy) * geom.width +
                                      static_cast<std::size_t>(ix)) * geom.channels;
            double* dst = patch + (ky * geom.kernel + kx) * geom.channels;
            for (std::size_t c = 0; c < geom.channels; ++c) dst[c] = src[c];
          }
        }
      }
    }
  }
  return push(std::move(n));
}

DenseMatrix& Tape::grad_buf(ValueId id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = DenseMatrix(n.value.rows(), n.value.cols(), 0.0);
  return n.grad;
}

void Tape::backward(ValueId loss) {
  const Node& ln = nodes_[loss];
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw std::invalid_argument("backward: loss must be a 1x1 scalar node, got " +
                                ln.value.shape_str());
  }
  for (Node& n : nodes_) n.grad = DenseMatrix();
  grad_buf(loss)(0, 0) = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || n.op == Op::kLeaf) continue;
    backward_node(i);
  }
}

void Tape::backward_node(std::size_t i) {
  Node& n = nodes_[i];
  const DenseMatrix& g = n.grad;
  const auto flows_a = [&] { return n.a >= 0 && nodes_[n.a].requires_grad; };
  const auto flows_b = [&] { return n.b >= 0 && nodes_[n.b].requires_grad; };

  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatMul: {
      if (flows_a()) detail::matmul_nt_into(g, nodes_[n.b].value, grad_buf(n.a));
      if (flows_b()) detail::matmul_tn_into(nodes_[n.a].value, g, grad_buf(n.b));
      break;
    }
    case Op::kTranspose: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
      }
      break;
    }
    case Op::kAdd: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k];
      }
      if (flows_b()) {
        DenseMatrix& gb = grad_buf(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) gb.data()[k] += g.data()[k];
      }
      break;
    }
    case Op::kSub: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k];
      }
      if (flows_b()) {
        DenseMatrix& gb = grad_buf(n.b);
        for (std::size_t k = 0; k < g.size(); ++k) gb.data()[k] -= g.data()[k];
      }
      break;
    }
    case Op::kMul: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const DenseMatrix& vb = nodes_[n.b].value;
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k] * vb.data()[k];
      }
      if (flows_b()) {
        DenseMatrix& gb = grad_buf(n.b);
        const DenseMatrix& va = nodes_[n.a].value;
        for (std::size_t k = 0; k < g.size(); ++k) gb.data()[k] += g.data()[k] * va.data()[k];
      }
      break;
    }
    case Op::kScale: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += n.scalar * g.data()[k];
      }
      break;
    }
    case Op::kAddScalar: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k];
      }
      break;
    }
    case Op::kAddRowVec: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k];
      }
      if (flows_b()) {
        DenseMatrix& gv = grad_buf(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) gv(0, c) += g(r, c);
      }
      break;
    }
    case Op::kDivRowVec: {
      const DenseMatrix& va = nodes_[n.a].value;
      const DenseMatrix& vv = nodes_[n.b].value;
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) / vv(0, c);
      }
      if (flows_b()) {
        DenseMatrix& gv = grad_buf(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c)
            gv(0, c) -= g(r, c) * va(r, c) / (vv(0, c) * vv(0, c));
      }
      break;
    }
    case Op::kRelu: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const DenseMatrix& va = nodes_[n.a].value;
        for (std::size_t k = 0; k < g.size(); ++k)
          if (va.data()[k] > 0.0) ga.data()[k] += g.data()[k];
      }
      break;
    }
    case Op::kTanh: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) {
          const double y = n.value.data()[k];
          ga.data()[k] += g.data()[k] * (1.0 - y * y);
        }
      }
      break;
    }
    case Op::kSqrt: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k)
          ga.data()[k] += g.data()[k] * 0.5 / n.value.data()[k];
      }
      break;
    }
    case Op::kLogSoftmax: {
      // dx = g - softmax(x) * rowsum(g)
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          double rs = 0.0;
          for (std::size_t c = 0; c < g.cols(); ++c) rs += g(r, c);
          for (std::size_t c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) - n.aux(r, c) * rs;
        }
      }
      break;
    }
    case Op::kDropout: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < g.size(); ++k) ga.data()[k] += g.data()[k] * n.aux.data()[k];
      }
      break;
    }
    case Op::kL2NormalizeRows: {
      // dx_i = (g_i - <g_i, y_i> y_i) / ||x_i||
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * n.value(r, c);
          const double inv = 1.0 / n.aux(r, 0);
          for (std::size_t c = 0; c < g.cols(); ++c)
            ga(r, c) += (g(r, c) - dot * n.value(r, c)) * inv;
        }
      }
      break;
    }
    case Op::kMeanAll: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const double gv = g(0, 0) / static_cast<double>(ga.size());
        for (std::size_t k = 0; k < ga.size(); ++k) ga.data()[k] += gv;
      }
      break;
    }
    case Op::kSumAll: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const double gv = g(0, 0);
        for (std::size_t k = 0; k < ga.size(); ++k) ga.data()[k] += gv;
      }
      break;
    }
    case Op::kRowSum: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < ga.rows(); ++r)
          for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(r, 0);
      }
      break;
    }
    case Op::kColMean: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const double inv = 1.0 / static_cast<double>(ga.rows());
        for (std::size_t r = 0; r < ga.rows(); ++r)
          for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(0, c) * inv;
      }
      break;
    }
    case Op::kConcatRows: {
      const std::size_t ra = nodes_[n.a].value.rows();
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < ga.size(); ++k) ga.data()[k] += g.data()[k];
      }
      if (flows_b()) {
        DenseMatrix& gb = grad_buf(n.b);
        const double* src = g.data() + ra * g.cols();
        for (std::size_t k = 0; k < gb.size(); ++k) gb.data()[k] += src[k];
      }
      break;
    }
    case Op::kConcatCols: {
      const std::size_t ca = nodes_[n.a].value.cols();
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
      }
      if (flows_b()) {
        DenseMatrix& gb = grad_buf(n.b);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < gb.cols(); ++c) gb(r, c) += g(r, ca + c);
      }
      break;
    }
    case Op::kSliceRows: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const std::size_t begin = static_cast<std::size_t>(n.scalar);
        double* dst = ga.data() + begin * ga.cols();
        for (std::size_t k = 0; k < g.size(); ++k) dst[k] += g.data()[k];
      }
      break;
    }
    case Op::kReshape: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        for (std::size_t k = 0; k < ga.size(); ++k) ga.data()[k] += g.data()[k];
      }
      break;
    }
    case Op::kIm2Col: {
      if (flows_a()) {
        DenseMatrix& ga = grad_buf(n.a);
        const ConvGeom& geom = n.geom;
        const std::size_t oh = geom.out_height(), ow = geom.out_width(), pl = geom.patch_len();
        for (std::size_t s = 0; s < ga.rows(); ++s) {
          double* out = ga.data() + s * ga.cols();
          for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const double* patch = g.data() + ((s * oh + oy) * ow + ox) * pl;
              for (std::size_t ky = 0; ky < geom.kernel; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * geom.stride + ky) -
                                          static_cast<std::ptrdiff_t>(geom.pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(geom.height)) continue;
                for (std::size_t kx = 0; kx < geom.kernel; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * geom.stride + kx) -
                                            static_cast<std::ptrdiff_t>(geom.pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(geom.width)) continue;
                  double* dst = out + (static_cast<std::size_t>(iy) * geom.width +
                                       static_cast<std::size_t>(ix)) * geom.channels;
                  const double* src = patch + (ky * geom.kernel + kx) * geom.channels;
                  for (std::size_t c = 0; c < geom.channels; ++c) dst[c] += src[c];
                }
              }
            }
          }
        }
      }
      break;
    }
  }
}

}  // namespace albench
