#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "albench/matrix.hpp"

namespace albench {

/// The unlabeled pool: one feature row per sample, scaled to [0,1] per
/// dimension at load time. Immutable after construction and safely shareable.
struct SamplePool {
  DenseMatrix features;     // N x d
  std::size_t num_classes = 0;
  std::string dataset_id;
  // Nonzero when rows are channels-last images (enables crop/flip
  // augmentations); 0x0 means plain feature vectors.
  std::size_t image_height = 0;
  std::size_t image_width = 0;

  std::size_t size() const { return features.rows(); }
  std::size_t dims() const { return features.cols(); }
};

/// Held-out evaluation split. Labels are open: this set is never part of the
/// labelling budget.
struct EvalSet {
  DenseMatrix features;
  std::vector<int> labels;

  std::size_t size() const { return features.rows(); }
};

class IndexPartition;
class BudgetLedger;

/// Ground-truth labels for the pool, sealed behind annotate(): there is no
/// other accessor on the public surface, so no selection strategy can peek.
class LabelOracle {
 public:
  LabelOracle() = default;
  explicit LabelOracle(std::vector<int> labels) : labels_(std::move(labels)) {}

  std::size_t size() const { return labels_.size(); }
  std::size_t query_count() const { return query_count_; }

 private:
  std::vector<int> labels_;
  std::size_t query_count_ = 0;

  friend std::vector<int> annotate(IndexPartition&, BudgetLedger&, LabelOracle&,
                                   const std::vector<std::size_t>&);
};

/// A loaded dataset: the active pool plus its sealed oracle and evaluation
/// split(s).
struct Dataset {
  SamplePool pool;
  LabelOracle oracle;
  EvalSet eval;
};

/// Per-column [lo, hi] ranges for min-max scaling.
struct MinMaxScale {
  std::vector<double> lo;
  std::vector<double> hi;
};

MinMaxScale fit_minmax(const DenseMatrix& features);

/// Maps each column affinely so the fitted range lands on [0,1]; values
/// outside the fitted range (e.g. eval rows scaled with pool statistics) are
/// clipped. Constant columns map to 0.
void apply_minmax(DenseMatrix& features, const MinMaxScale& scale);

}  // namespace albench
