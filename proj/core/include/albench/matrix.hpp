#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace albench {

class RngStream;

/// Dense row-major matrix of doubles. All numerics in this project are
/// 64-bit; the gradient-check tolerances are not reachable in float.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  bool all_finite() const;
  bool same_shape(const DenseMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  std::string shape_str() const;

  void fill(double v);
  void fill_uniform(RngStream& rng, double lo, double hi);
  void fill_normal(RngStream& rng, double mu, double sigma);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Plain (untaped) matrix product. Throws std::invalid_argument naming both
/// shapes on inner-dimension mismatch.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& m);

/// Row-wise softmax with max-subtraction; rows sum to 1 within 1e-9 on any
/// finite input.
DenseMatrix softmax_rows(const DenseMatrix& logits);

/// In-place kernels used by both the plain API and the tape.
namespace detail {
void matmul_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
// out += a * b^T
void matmul_nt_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
// out += a^T * b
void matmul_tn_into(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
}  // namespace detail

}  // namespace albench
