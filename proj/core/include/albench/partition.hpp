#pragma once

#include <cstddef>
#include <vector>

#include "albench/pool.hpp"
#include "albench/rng.hpp"

namespace albench {

/// Disjoint, exhaustive labeled/unlabeled split of pool indices. The labeled
/// side only grows; the unlabeled side only shrinks.
class IndexPartition {
 public:
  IndexPartition() = default;
  explicit IndexPartition(std::size_t pool_size);

  const std::vector<std::size_t>& labeled() const { return labeled_; }
  const std::vector<std::size_t>& unlabeled() const { return unlabeled_; }
  bool is_labeled(std::size_t index) const { return labeled_flag_[index]; }
  std::size_t pool_size() const { return labeled_flag_.size(); }

  /// Moves indices from unlabeled to labeled. Throws std::invalid_argument
  /// naming the first index that is already labeled or out of range.
  void mark_labeled(const std::vector<std::size_t>& indices);

 private:
  std::vector<std::size_t> labeled_;    // in annotation order
  std::vector<std::size_t> unlabeled_;  // ascending
  std::vector<char> labeled_flag_;
};

/// Budget state machine: total budget n, initial size s, cycles c, spent.
class BudgetLedger {
 public:
  BudgetLedger() = default;
  /// Requires s <= n <= pool_size and c >= 2.
  BudgetLedger(std::size_t total_budget, std::size_t initial_size, std::size_t cycles,
               std::size_t pool_size);

  std::size_t total_budget() const { return total_budget_; }
  std::size_t initial_size() const { return initial_size_; }
  std::size_t cycles() const { return cycles_; }
  std::size_t spent() const { return spent_; }
  std::size_t remaining() const { return total_budget_ - spent_; }

  void spend(std::size_t count);

 private:
  std::size_t total_budget_ = 0;
  std::size_t initial_size_ = 0;
  std::size_t cycles_ = 2;
  std::size_t spent_ = 0;
};

/// Per-cycle annotation quota. Cycle 1 is the initial random sample of s;
/// cycles 2..c-1 get floor((n-s)/(c-1)); the final cycle absorbs the
/// remainder so the quotas sum to exactly n.
std::size_t cycle_quota(const BudgetLedger& ledger, std::size_t cycle_index);

/// Moves the requested unlabeled indices to the labeled side, spends budget,
/// and returns their ground-truth labels. This is the only label access path.
/// State is untouched on error.
std::vector<int> annotate(IndexPartition& partition, BudgetLedger& ledger, LabelOracle& oracle,
                          const std::vector<std::size_t>& indices);

/// Uniformly samples the initial s indices and annotates them. Must be the
/// first budget action: throws std::logic_error if anything is labeled or
/// spent already.
std::vector<int> initial_random_sample(IndexPartition& partition, BudgetLedger& ledger,
                                       LabelOracle& oracle, RngStream& rng,
                                       std::vector<std::size_t>* chosen_out = nullptr);

}  // namespace albench
