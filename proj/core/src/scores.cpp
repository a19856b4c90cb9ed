#include "albench/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace albench {

namespace {

double row_entropy(const DenseMatrix& p, std::size_t row) {
  double h = 0.0;
  for (std::size_t j = 0; j < p.cols(); ++j) {
    const double v = p(row, j);
    if (v < -1e-9) {
      throw std::invalid_argument("entropy: negative probability " + std::to_string(v) +
                                  " at row " + std::to_string(row));
    }
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

ScoreTable score_entropy(const DenseMatrix& probabilities) {
  ScoreTable t;
  t.orientation = ScoreOrientation::kHigherSelected;
  t.scores.resize(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) t.scores[i] = row_entropy(probabilities, i);
  return t;
}

ScoreTable score_margin(const DenseMatrix& probabilities) {
  if (probabilities.cols() < 2) throw std::invalid_argument("margin: need >= 2 classes");
  ScoreTable t;
  t.orientation = ScoreOrientation::kLowerSelected;
  t.scores.resize(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    double top1 = -1.0, top2 = -1.0;
    for (std::size_t j = 0; j < probabilities.cols(); ++j) {
      const double v = probabilities(i, j);
      if (v > top1) {
        top2 = top1;
        top1 = v;
      } else if (v > top2) {
        top2 = v;
      }
    }
    t.scores[i] = top1 - top2;
  }
  return t;
}

ScoreTable score_least_confidence(const DenseMatrix& probabilities) {
  if (probabilities.cols() < 2) throw std::invalid_argument("least_confidence: need >= 2 classes");
  ScoreTable t;
  t.orientation = ScoreOrientation::kLowerSelected;
  t.scores.resize(probabilities.rows());
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    double mx = probabilities(i, 0);
    for (std::size_t j = 1; j < probabilities.cols(); ++j) mx = std::max(mx, probabilities(i, j));
    t.scores[i] = mx;
  }
  return t;
}

ScoreTable score_bald(const std::vector<DenseMatrix>& mc_passes) {
  if (mc_passes.size() < 2) throw std::invalid_argument("bald: need >= 2 stochastic passes");
  const std::size_t n = mc_passes[0].rows();
  const std::size_t k = mc_passes[0].cols();
  const double inv_t = 1.0 / static_cast<double>(mc_passes.size());

  ScoreTable t;
  t.orientation = ScoreOrientation::kHigherSelected;
  t.scores.assign(n, 0.0);

  DenseMatrix mean(n, k, 0.0);
  std::vector<double> mean_pass_entropy(n, 0.0);
  for (const DenseMatrix& pass : mc_passes) {
    if (pass.rows() != n || pass.cols() != k) {
      throw std::invalid_argument("bald: pass shape " + pass.shape_str() +
                                  " differs from first pass " + mc_passes[0].shape_str());
    }
    for (std::size_t i = 0; i < n; ++i) {
      mean_pass_entropy[i] += row_entropy(pass, i) * inv_t;
      for (std::size_t j = 0; j < k; ++j) mean(i, j) += pass(i, j) * inv_t;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    t.scores[i] = row_entropy(mean, i) - mean_pass_entropy[i];
  }
  return t;
}

std::vector<std::size_t> select_by_score(const ScoreTable& table, std::size_t batch_size) {
  if (batch_size > table.scores.size()) {
    throw std::invalid_argument("select_by_score: batch " + std::to_string(batch_size) +
                                " exceeds " + std::to_string(table.scores.size()) + " candidates");
  }
  std::vector<std::size_t> order(table.scores.size());
  std::iota(order.begin(), order.end(), 0);
  const bool higher = table.orientation == ScoreOrientation::kHigherSelected;
  const auto better = [&](std::size_t a, std::size_t b) {
    if (table.scores[a] != table.scores[b]) {
      return higher ? table.scores[a] > table.scores[b] : table.scores[a] < table.scores[b];
    }
    return a < b;  // tie-break: lowest position
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(batch_size),
                    order.end(), better);
  order.resize(batch_size);
  return order;
}

}  // namespace albench
