#include "albench/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace albench {

double finite_diff_check(const ScalarFn& f, std::span<const DenseMatrix> params,
                         std::span<const DenseMatrix> analytic_grads, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_check: step must be > 0");
  if (params.size() != analytic_grads.size()) {
    throw std::invalid_argument("finite_diff_check: " + std::to_string(params.size()) +
                                " params vs " + std::to_string(analytic_grads.size()) + " grads");
  }
  std::vector<DenseMatrix> work(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t p = 0; p < work.size(); ++p) {
    if (!params[p].same_shape(analytic_grads[p])) {
      throw std::invalid_argument("finite_diff_check: grad shape " +
                                  analytic_grads[p].shape_str() + " does not match param " +
                                  params[p].shape_str());
    }
    for (std::size_t k = 0; k < work[p].size(); ++k) {
      const double orig = work[p].data()[k];
      work[p].data()[k] = orig + step;
      const double fp = f(work);
      work[p].data()[k] = orig - step;
      const double fm = f(work);
      work[p].data()[k] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      const double analytic = analytic_grads[p].data()[k];
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace albench
