// Independent reference implementations used to pin expected values in the
// test suites. Everything here is deliberately naive (triple loops, exhaustive
// enumeration, long-double arithmetic) and stays off the library's compute
// paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "albench/matrix.hpp"

namespace oracles {

/// Brute-force triple-loop matrix product.
inline albench::DenseMatrix matmul_naive(const albench::DenseMatrix& a,
                                         const albench::DenseMatrix& b) {
  albench::DenseMatrix out(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

/// Row softmax at extended precision, no max-subtraction trick.
inline std::vector<double> softmax_longdouble(const std::vector<double>& logits) {
  long double sum = 0.0L;
  std::vector<long double> e(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = expl(static_cast<long double>(logits[i]));
    sum += e[i];
  }
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<double>(e[i] / sum);
  return out;
}

/// Direct evaluation of the contrastive pair loss: mean over all 2B anchors
/// of -log( exp(cos(z_i, z_pair)/tau) / sum_{k != i} exp(cos(z_i, z_k)/tau) ).
inline double nt_xent_naive(const albench::DenseMatrix& z, double tau) {
  const std::size_t n = z.rows();
  const std::size_t b = n / 2;
  const auto cosine = [&](std::size_t i, std::size_t j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) {
      dot += z(i, c) * z(j, c);
      ni += z(i, c) * z(i, c);
      nj += z(j, c) * z(j, c);
    }
    return dot / std::sqrt(ni * nj);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pair = (i + b) % n;
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      denom += std::exp(cosine(i, k) / tau);
    }
    total += -std::log(std::exp(cosine(i, pair) / tau) / denom);
  }
  return total / static_cast<double>(n);
}

/// Two-loop cross-correlation loss on pre-standardized embeddings.
inline double barlow_naive(const albench::DenseMatrix& za_std, const albench::DenseMatrix& zb_std,
                           double lambda) {
  const std::size_t batch = za_std.rows(), p = za_std.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double c = 0.0;
      for (std::size_t r = 0; r < batch; ++r) c += za_std(r, i) * zb_std(r, j);
      c /= static_cast<double>(batch);
      if (i == j) loss += (1.0 - c) * (1.0 - c);
      else loss += lambda * c * c;
    }
  }
  return loss;
}

/// Plain per-column standardization (population variance).
inline albench::DenseMatrix standardize_naive(const albench::DenseMatrix& z) {
  albench::DenseMatrix out = z;
  for (std::size_t j = 0; j < z.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) mean += z(i, j);
    mean /= static_cast<double>(z.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) var += (z(i, j) - mean) * (z(i, j) - mean);
    var /= static_cast<double>(z.rows());
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < z.rows(); ++i) out(i, j) = (z(i, j) - mean) / sd;
  }
  return out;
}

/// Exhaustive optimal k-center cost: min over all center subsets of size b of
/// the max distance from any point to its nearest center. points are rows.
inline double optimal_k_center_radius(const albench::DenseMatrix& points,
                                      const std::vector<std::size_t>& mandatory_centers,
                                      std::size_t b) {
  const std::size_t n = points.rows();
  const auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < points.cols(); ++c) {
      const double d = points(i, c) - points(j, c);
      s += d * d;
    }
    return std::sqrt(s);
  };
  const auto radius_with = [&](const std::vector<std::size_t>& centers) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c : centers) best = std::min(best, dist(i, c));
      worst = std::max(worst, best);
    }
    return worst;
  };

  std::vector<char> is_mandatory(n, 0);
  for (std::size_t c : mandatory_centers) is_mandatory[c] = 1;
  std::vector<std::size_t> free_points;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_mandatory[i]) free_points.push_back(i);
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<char> mask(free_points.size(), 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(b), 1);
  std::sort(mask.begin(), mask.end());
  do {
    std::vector<std::size_t> centers = mandatory_centers;
    for (std::size_t i = 0; i < free_points.size(); ++i) {
      if (mask[i]) centers.push_back(free_points[i]);
    }
    best = std::min(best, radius_with(centers));
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

/// Greedy-coreset radius given the chosen centers (for the 2x bound check).
inline double k_center_radius(const albench::DenseMatrix& points,
                              const std::vector<std::size_t>& centers) {
  double worst = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) {
      double s = 0.0;
      for (std::size_t d = 0; d < points.cols(); ++d) {
        const double diff = points(i, d) - points(c, d);
        s += diff * diff;
      }
      best = std::min(best, std::sqrt(s));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Shannon entropy of a probability vector, natural log, 0 ln 0 = 0.
inline double entropy_naive(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace oracles
