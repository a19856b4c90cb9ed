#pragma once

#include <cstddef>
#include <vector>

#include "albench/matrix.hpp"

namespace albench {

enum class ScoreOrientation { kHigherSelected, kLowerSelected };

/// Per-candidate scores plus the direction in which "best" lies.
struct ScoreTable {
  std::vector<double> scores;
  ScoreOrientation orientation = ScoreOrientation::kHigherSelected;
};

/// Shannon entropy -sum p ln p per row (0 ln 0 := 0). Higher is selected.
/// Throws if any probability is below -1e-9.
ScoreTable score_entropy(const DenseMatrix& probabilities);

/// Top-1 minus top-2 probability per row. Lower is selected.
ScoreTable score_margin(const DenseMatrix& probabilities);

/// Max probability per row. Lower is selected.
ScoreTable score_least_confidence(const DenseMatrix& probabilities);

/// Mutual information between prediction and posterior sample:
/// H(mean over passes) - mean over passes of H. Higher is selected.
/// mc_passes holds T matrices of identical (N x K) shape.
ScoreTable score_bald(const std::vector<DenseMatrix>& mc_passes);

/// Top-b candidate positions under the table's orientation, ties broken by
/// lowest position, output ordered best-first.
std::vector<std::size_t> select_by_score(const ScoreTable& table, std::size_t batch_size);

}  // namespace albench
