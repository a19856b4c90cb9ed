#pragma once

#include <functional>
#include <span>
#include <vector>

#include "albench/matrix.hpp"

namespace albench {

/// Scalar function of a parameter list, evaluated with the given values.
using ScalarFn = std::function<double(std::span<const DenseMatrix>)>;

/// Compares analytic gradients against central finite differences of f.
/// Returns max over all parameter entries of
///   |analytic - central_difference| / max(1, |central_difference|).
/// step must be > 0.
double finite_diff_check(const ScalarFn& f, std::span<const DenseMatrix> params,
                         std::span<const DenseMatrix> analytic_grads, double step);

}  // namespace albench
