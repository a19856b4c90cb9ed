#include "albench/ssl_objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace albench {

namespace {

constexpr double kMaskLogit = -1e9;  // finite stand-in for -inf in masked softmax rows

}  // namespace

void NegativeQueue::push(const DenseMatrix& rows) {
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    entries_.emplace_back(rows.row(i).begin(), rows.row(i).end());
    if (entries_.size() > capacity_) entries_.pop_front();
  }
}

DenseMatrix NegativeQueue::snapshot() const {
  if (entries_.empty()) return {};
  DenseMatrix out(entries_.size(), entries_.front().size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::copy(entries_[i].begin(), entries_[i].end(), out.row(i).begin());
  }
  return out;
}

void PrototypeBank::renormalize_rows() {
  for (std::size_t i = 0; i < prototypes.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < prototypes.cols(); ++j) sq += prototypes(i, j) * prototypes(i, j);
    const double norm = std::sqrt(sq);
    if (norm <= 0.0) {
      throw std::runtime_error("prototype bank: zero-norm prototype " + std::to_string(i));
    }
    for (std::size_t j = 0; j < prototypes.cols(); ++j) prototypes(i, j) /= norm;
  }
}

ValueId nt_xent_loss(Tape& t, ValueId z_stacked, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("nt_xent_loss: temperature must be > 0");
  const std::size_t n2 = t.value(z_stacked).rows();
  if (n2 < 4 || n2 % 2 != 0) {
    throw std::invalid_argument("nt_xent_loss: need an even stack of >= 4 rows, got " +
                                std::to_string(n2));
  }
  const std::size_t b = n2 / 2;

  const ValueId zn = t.l2_normalize_rows(z_stacked);
  const ValueId sim = t.scale(t.matmul(zn, t.transpose(zn)), 1.0 / tau);

  // Self-similarity is pushed out of every softmax row; the positive picks
  // out the partner row (i <-> i + B).
  DenseMatrix diag_mask(n2, n2, 0.0);
  DenseMatrix positive(n2, n2, 0.0);
  for (std::size_t i = 0; i < n2; ++i) {
    diag_mask(i, i) = kMaskLogit;
    positive(i, (i + b) % n2) = 1.0;
  }
  const ValueId masked = t.add(sim, t.constant(std::move(diag_mask)));
  const ValueId logsm = t.log_softmax(masked);
  const ValueId picked = t.sum_all(t.mul(logsm, t.constant(std::move(positive))));
  return t.scale(picked, -1.0 / static_cast<double>(n2));
}

ValueId info_nce_loss(Tape& t, ValueId queries, const DenseMatrix& keys,
                      const DenseMatrix& negatives, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("info_nce_loss: temperature must be > 0");
  const std::size_t b = t.value(queries).rows();
  if (keys.rows() != b) {
    throw std::invalid_argument("info_nce_loss: " + std::to_string(keys.rows()) + " keys for " +
                                std::to_string(b) + " queries");
  }
  const ValueId qn = t.l2_normalize_rows(queries);
  if (negatives.rows() == 0) {
    // No stored negatives yet: contrast against the other in-batch keys.
    // logits = qn k^T with the positive on the diagonal.
    const ValueId logits = t.scale(t.matmul(qn, t.constant(transpose(keys))), 1.0 / tau);
    const ValueId logsm = t.log_softmax(logits);
    DenseMatrix pick(b, b, 0.0);
    for (std::size_t i = 0; i < b; ++i) pick(i, i) = 1.0;
    const ValueId picked = t.sum_all(t.mul(logsm, t.constant(std::move(pick))));
    return t.scale(picked, -1.0 / static_cast<double>(b));
  }
  // positive logit: rowwise dot(q, k); negatives from the queue
  const ValueId pos = t.row_sum(t.mul(qn, t.constant(keys)));
  const ValueId negs = t.matmul(qn, t.constant(transpose(negatives)));
  const ValueId logits = t.scale(t.concat_cols(pos, negs), 1.0 / tau);
  const ValueId logsm = t.log_softmax(logits);
  // label is always column 0 (the positive)
  DenseMatrix pick(b, t.value(logits).cols(), 0.0);
  for (std::size_t i = 0; i < b; ++i) pick(i, 0) = 1.0;
  const ValueId picked = t.sum_all(t.mul(logsm, t.constant(std::move(pick))));
  return t.scale(picked, -1.0 / static_cast<double>(b));
}

ValueId byol_loss(Tape& t, ValueId prediction, const DenseMatrix& target) {
  const DenseMatrix& p = t.value(prediction);
  if (!p.same_shape(target)) {
    throw std::invalid_argument("byol_loss shape mismatch: " + p.shape_str() + " vs " +
                                target.shape_str());
  }
  // Normalize the constant target up front; zero rows are contract errors.
  DenseMatrix tn = target;
  for (std::size_t i = 0; i < tn.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < tn.cols(); ++j) sq += tn(i, j) * tn(i, j);
    const double norm = std::sqrt(sq);
    if (norm <= 0.0) {
      throw std::invalid_argument("byol_loss: zero-norm target row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < tn.cols(); ++j) tn(i, j) /= norm;
  }
  const ValueId pn = t.l2_normalize_rows(prediction);  // throws on zero-norm prediction row
  const ValueId cos = t.row_sum(t.mul(pn, t.constant(std::move(tn))));
  return t.add_scalar(t.scale(t.mean_all(cos), -2.0), 2.0);
}

DenseMatrix sinkhorn_codes(const DenseMatrix& scores, double eps, std::size_t iterations) {
  if (iterations < 1) {
    throw std::invalid_argument("sinkhorn_codes: need at least 1 iteration");
  }
  if (eps <= 0.0) throw std::invalid_argument("sinkhorn_codes: eps must be > 0");
  const std::size_t n = scores.rows(), p = scores.cols();
  if (p < 2) throw std::invalid_argument("sinkhorn_codes: need >= 2 prototypes");

  DenseMatrix q(n, p);
  // exp with row-max subtraction; eps sharpens
  for (std::size_t i = 0; i < n; ++i) {
    double mx = scores(i, 0);
    for (std::size_t j = 1; j < p; ++j) mx = std::max(mx, scores(i, j));
    for (std::size_t j = 0; j < p; ++j) q(i, j) = std::exp((scores(i, j) - mx) / eps);
  }

  const double col_target = static_cast<double>(n) / static_cast<double>(p);
  for (std::size_t it = 0; it < iterations; ++it) {
    // columns to equal mass
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += q(i, j);
      if (s <= 0.0) continue;
      const double f = col_target / s;
      for (std::size_t i = 0; i < n; ++i) q(i, j) *= f;
    }
    // rows to unit mass (last, so the returned codes are distributions)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += q(i, j);
      if (s <= 0.0) continue;
      const double f = 1.0 / s;
      for (std::size_t j = 0; j < p; ++j) q(i, j) *= f;
    }
  }
  return q;
}

ValueId swav_loss(Tape& t, ValueId scores_stacked, const DenseMatrix& codes_stacked, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("swav_loss: temperature must be > 0");
  const DenseMatrix& s = t.value(scores_stacked);
  if (!s.same_shape(codes_stacked)) {
    throw std::invalid_argument("swav_loss shape mismatch: scores " + s.shape_str() +
                                " vs codes " + codes_stacked.shape_str());
  }
  const std::size_t n2 = s.rows();
  if (n2 < 2 || n2 % 2 != 0) {
    throw std::invalid_argument("swav_loss: need an even stack of rows, got " +
                                std::to_string(n2));
  }
  const std::size_t b = n2 / 2;
  // Swap: row i is supervised by the partner view's code.
  DenseMatrix swapped(n2, s.cols());
  for (std::size_t i = 0; i < n2; ++i) {
    const std::size_t partner = (i + b) % n2;
    for (std::size_t j = 0; j < s.cols(); ++j) swapped(i, j) = codes_stacked(partner, j);
  }
  const ValueId logsm = t.log_softmax(t.scale(scores_stacked, 1.0 / tau));
  const ValueId picked = t.sum_all(t.mul(logsm, t.constant(std::move(swapped))));
  return t.scale(picked, -1.0 / static_cast<double>(n2));
}

ValueId standardize_columns(Tape& t, ValueId z) {
  const DenseMatrix& v = t.value(z);
  const std::size_t rows = v.rows();
  if (rows < 2) throw std::invalid_argument("standardize_columns: need >= 2 rows");
  // Zero-variance columns are contract errors; detect on values up front so
  // the error names the dimension.
  for (std::size_t j = 0; j < v.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows; ++i) mean += v(i, j);
    mean /= static_cast<double>(rows);
    double var = 0.0;
    for (std::size_t i = 0; i < rows; ++i) var += (v(i, j) - mean) * (v(i, j) - mean);
    if (var <= 0.0) {
      throw std::invalid_argument("standardize_columns: zero-variance dimension " +
                                  std::to_string(j));
    }
  }
  const ValueId neg_mean = t.scale(t.col_mean(z), -1.0);
  const ValueId centered = t.add_rowvec(z, neg_mean);
  const ValueId var = t.col_mean(t.mul(centered, centered));
  const ValueId std_dev = t.sqrt_elem(var);
  return t.div_rowvec(centered, std_dev);
}

ValueId barlow_twins_loss(Tape& t, ValueId z_a, ValueId z_b, double lambda) {
  const DenseMatrix& va = t.value(z_a);
  const DenseMatrix& vb = t.value(z_b);
  if (!va.same_shape(vb)) {
    throw std::invalid_argument("barlow_twins_loss shape mismatch: " + va.shape_str() + " vs " +
                                vb.shape_str());
  }
  if (lambda <= 0.0) throw std::invalid_argument("barlow_twins_loss: lambda must be > 0");
  const std::size_t batch = va.rows(), p = va.cols();
  const ValueId sa = standardize_columns(t, z_a);
  const ValueId sb = standardize_columns(t, z_b);
  const ValueId c = t.scale(t.matmul(t.transpose(sa), sb), 1.0 / static_cast<double>(batch));

  // (1 - C_ii)^2 on the diagonal, lambda * C_ij^2 off it:
  // loss = sum(diag_mask * (C - I)^2) + lambda * sum(offdiag_mask * C^2)
  DenseMatrix eye(p, p, 0.0);
  DenseMatrix diag_mask(p, p, 0.0);
  DenseMatrix off_mask(p, p, lambda);
  for (std::size_t i = 0; i < p; ++i) {
    eye(i, i) = 1.0;
    diag_mask(i, i) = 1.0;
    off_mask(i, i) = 0.0;
  }
  const ValueId dev = t.sub(c, t.constant(std::move(eye)));
  const ValueId inv_term = t.sum_all(t.mul(t.mul(dev, dev), t.constant(std::move(diag_mask))));
  const ValueId red_term = t.sum_all(t.mul(t.mul(c, c), t.constant(std::move(off_mask))));
  return t.add(inv_term, red_term);
}

}  // namespace albench
