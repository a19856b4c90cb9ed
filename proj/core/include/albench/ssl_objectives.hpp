#pragma once

#include <deque>
#include <span>

#include "albench/matrix.hpp"
#include "albench/tape.hpp"

namespace albench {

/// FIFO store of normalized key embeddings used as extra negatives.
class NegativeQueue {
 public:
  explicit NegativeQueue(std::size_t capacity) : capacity_(capacity) {}

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  /// Enqueues each row; evicts strictly FIFO beyond capacity.
  void push(const DenseMatrix& rows);

  /// All entries as a matrix (size() x dim), oldest first. Empty matrix when
  /// the queue is empty.
  DenseMatrix snapshot() const;

 private:
  std::size_t capacity_;
  std::deque<std::vector<double>> entries_;
};

/// L2-normalized prototype vectors for clustering-based objectives.
struct PrototypeBank {
  DenseMatrix prototypes;  // P x p

  void renormalize_rows();
};

/// Contrastive loss over 2B stacked views [view_a; view_b]: row i pairs with
/// row (i+B) mod 2B. Cosine similarities at temperature tau; the anchor's
/// self-similarity is excluded from the denominator. Returns the mean over
/// all 2B anchors.
ValueId nt_xent_loss(Tape& t, ValueId z_stacked, double tau);

/// InfoNCE for a query/key/negatives split: positives are the row-aligned
/// (query, key) pairs, negatives come from the queue snapshot. Keys and
/// negatives are constants (stop-gradient). With an empty negatives matrix
/// the other in-batch keys serve as negatives (the first-step case, before
/// the queue holds anything).
ValueId info_nce_loss(Tape& t, ValueId queries, const DenseMatrix& keys,
                      const DenseMatrix& negatives, double tau);

/// Mean over rows of 2 - 2 * cos(prediction_i, target_i). The target is a
/// plain matrix: stop-gradient is structural. Throws on a zero-norm row.
ValueId byol_loss(Tape& t, ValueId prediction, const DenseMatrix& target);

/// Balanced soft assignments: Sinkhorn-Knopp on exp(scores / eps) with unit
/// row sums and equal column mass (rows / P per column). scores is (rows x P).
DenseMatrix sinkhorn_codes(const DenseMatrix& scores, double eps, std::size_t iterations);

/// Swapped-prediction loss over stacked views: codes of one view supervise
/// the softmax scores (at temperature tau) of the other. codes are constant.
ValueId swav_loss(Tape& t, ValueId scores_stacked, const DenseMatrix& codes_stacked, double tau);

/// Cross-correlation redundancy-reduction loss. Embeddings are batch
/// standardized per dimension (throws naming any zero-variance dimension),
/// C = (1/B) za^T zb, loss = sum_i (1-C_ii)^2 + lambda * sum_{i != j} C_ij^2.
ValueId barlow_twins_loss(Tape& t, ValueId z_a, ValueId z_b, double lambda);

/// Batch standardization helper (zero mean, unit population variance per
/// column) on the tape. Exposed for the loss and its tests.
ValueId standardize_columns(Tape& t, ValueId z);

}  // namespace albench
