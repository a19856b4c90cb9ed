#pragma once

#include <vector>

#include "albench/matrix.hpp"

namespace albench {

/// Online/momentum parameter pairing for momentum encoders. Both sides are
/// borrowed; shapes must match index by index.
struct MomentumPair {
  std::vector<DenseMatrix*> online;    // theta_q
  std::vector<DenseMatrix*> momentum;  // theta_k
  double coefficient = 0.99;           // m in [0, 1)
};

/// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise.
void momentum_update(MomentumPair& pair);

}  // namespace albench
