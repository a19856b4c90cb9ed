#include "albench/partition.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace albench {

IndexPartition::IndexPartition(std::size_t pool_size)
    : unlabeled_(pool_size), labeled_flag_(pool_size, 0) {
  for (std::size_t i = 0; i < pool_size; ++i) unlabeled_[i] = i;
}

void IndexPartition::mark_labeled(const std::vector<std::size_t>& indices) {
  for (std::size_t idx : indices) {
    if (idx >= labeled_flag_.size()) {
      throw std::invalid_argument("partition: index " + std::to_string(idx) + " out of range (N=" +
                                  std::to_string(labeled_flag_.size()) + ")");
    }
    if (labeled_flag_[idx]) {
      throw std::invalid_argument("partition: index " + std::to_string(idx) +
                                  " is already labeled");
    }
  }
  for (std::size_t idx : indices) {
    labeled_flag_[idx] = 1;
    labeled_.push_back(idx);
  }
  std::erase_if(unlabeled_, [this](std::size_t i) { return labeled_flag_[i] != 0; });
}

BudgetLedger::BudgetLedger(std::size_t total_budget, std::size_t initial_size, std::size_t cycles,
                           std::size_t pool_size)
    : total_budget_(total_budget), initial_size_(initial_size), cycles_(cycles) {
  if (cycles < 2) throw std::invalid_argument("budget: cycles must be >= 2");
  if (initial_size > total_budget) {
    throw std::invalid_argument("budget: initial size " + std::to_string(initial_size) +
                                " exceeds total budget " + std::to_string(total_budget));
  }
  if (total_budget > pool_size) {
    throw std::invalid_argument("budget: total budget " + std::to_string(total_budget) +
                                " exceeds pool size " + std::to_string(pool_size));
  }
}

void BudgetLedger::spend(std::size_t count) {
  if (spent_ + count > total_budget_) {
    throw std::runtime_error("budget exceeded: requested " + std::to_string(count) +
                             ", remaining " + std::to_string(remaining()));
  }
  spent_ += count;
}

std::size_t cycle_quota(const BudgetLedger& ledger, std::size_t cycle_index) {
  const std::size_t c = ledger.cycles();
  if (cycle_index < 1 || cycle_index > c) {
    throw std::invalid_argument("cycle_quota: cycle index " + std::to_string(cycle_index) +
                                " outside 1.." + std::to_string(c));
  }
  const std::size_t s = ledger.initial_size();
  const std::size_t n = ledger.total_budget();
  if (cycle_index == 1) return s;
  const std::size_t base = (n - s) / (c - 1);
  if (cycle_index < c) return base;
  return n - s - base * (c - 2);  // remainder lands on the final cycle
}

std::vector<int> annotate(IndexPartition& partition, BudgetLedger& ledger, LabelOracle& oracle,
                          const std::vector<std::size_t>& indices) {
  if (indices.empty()) return {};
  if (ledger.spent() + indices.size() > ledger.total_budget()) {
    throw std::runtime_error("budget exceeded: requested " + std::to_string(indices.size()) +
                             ", remaining " + std::to_string(ledger.remaining()));
  }
  partition.mark_labeled(indices);  // validates membership before any mutation
  ledger.spend(indices.size());
  std::vector<int> labels(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) labels[i] = oracle.labels_[indices[i]];
  oracle.query_count_ += indices.size();
  return labels;
}

std::vector<int> initial_random_sample(IndexPartition& partition, BudgetLedger& ledger,
                                       LabelOracle& oracle, RngStream& rng,
                                       std::vector<std::size_t>* chosen_out) {
  if (!partition.labeled().empty() || ledger.spent() != 0) {
    throw std::logic_error("initial_random_sample: budget already started");
  }
  const std::vector<std::size_t> chosen =
      sample_without_replacement(partition.pool_size(), ledger.initial_size(), rng);
  if (chosen_out) *chosen_out = chosen;
  return annotate(partition, ledger, oracle, chosen);
}

}  // namespace albench
