#include "albench/pool.hpp"

#include <algorithm>

namespace albench {

MinMaxScale fit_minmax(const DenseMatrix& features) {
  MinMaxScale s;
  s.lo.assign(features.cols(), 0.0);
  s.hi.assign(features.cols(), 0.0);
  for (std::size_t j = 0; j < features.cols(); ++j) {
    double lo = features(0, j), hi = features(0, j);
    for (std::size_t i = 1; i < features.rows(); ++i) {
      lo = std::min(lo, features(i, j));
      hi = std::max(hi, features(i, j));
    }
    s.lo[j] = lo;
    s.hi[j] = hi;
  }
  return s;
}

void apply_minmax(DenseMatrix& features, const MinMaxScale& scale) {
  for (std::size_t j = 0; j < features.cols(); ++j) {
    const double lo = scale.lo[j];
    const double range = scale.hi[j] - lo;
    for (std::size_t i = 0; i < features.rows(); ++i) {
      double v = range > 0.0 ? (features(i, j) - lo) / range : 0.0;
      features(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
}

}  // namespace albench
