#include "albench/momentum.hpp"

#include <stdexcept>
#include <string>

namespace albench {

void momentum_update(MomentumPair& pair) {
  if (pair.online.size() != pair.momentum.size()) {
    throw std::invalid_argument("momentum_update: " + std::to_string(pair.online.size()) +
                                " online vs " + std::to_string(pair.momentum.size()) +
                                " momentum parameters");
  }
  if (pair.coefficient < 0.0 || pair.coefficient >= 1.0) {
    throw std::invalid_argument("momentum_update: coefficient must be in [0,1)");
  }
  const double m = pair.coefficient;
  for (std::size_t i = 0; i < pair.online.size(); ++i) {
    const DenseMatrix& q = *pair.online[i];
    DenseMatrix& k = *pair.momentum[i];
    if (!q.same_shape(k)) {
      throw std::invalid_argument("momentum_update: shape mismatch at parameter " +
                                  std::to_string(i) + ": " + q.shape_str() + " vs " +
                                  k.shape_str());
    }
    for (std::size_t j = 0; j < k.size(); ++j) {
      k.data()[j] = m * k.data()[j] + (1.0 - m) * q.data()[j];
    }
  }
}

}  // namespace albench
