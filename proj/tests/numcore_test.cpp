#include <doctest.h>

#include <cmath>

#include "albench/grad_check.hpp"
#include "albench/matrix.hpp"
#include "albench/rng.hpp"
#include "albench/tape.hpp"
#include "oracles.hpp"

using namespace albench;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, RngStream& rng, double scale = 1.0) {
  DenseMatrix m(r, c);
  m.fill_normal(rng, 0.0, scale);
  return m;
}

}  // namespace

TEST_CASE("matmul identity") {
  DenseMatrix eye(3, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  RngStream rng(7);
  const DenseMatrix m = random_matrix(3, 5, rng);
  const DenseMatrix out = matmul(eye, m);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(out.data()[i] == m.data()[i]);
}

TEST_CASE("matmul hand example") {
  const DenseMatrix a(2, 2, {1, 2, 3, 4});
  const DenseMatrix b(2, 1, {1, 1});
  const DenseMatrix out = matmul(a, b);
  CHECK(out(0, 0) == doctest::Approx(3.0));
  CHECK(out(1, 0) == doctest::Approx(7.0));
}

TEST_CASE("matmul matches triple-loop oracle") {
  RngStream rng(11);
  const DenseMatrix a = random_matrix(5, 4, rng);
  const DenseMatrix b = random_matrix(4, 3, rng);
  const DenseMatrix fast = matmul(a, b);
  const DenseMatrix slow = oracles::matmul_naive(a, b);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(std::abs(fast.data()[i] - slow.data()[i]) < 1e-12);
  }
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const DenseMatrix a(2, 3);
  const DenseMatrix b(2, 3);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("(2x3)"), std::invalid_argument);
}

TEST_CASE("softmax symmetric row") {
  const DenseMatrix logits(1, 2, {0.0, 0.0});
  const DenseMatrix p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax extreme logits stay stable") {
  const DenseMatrix logits(1, 2, {1000.0, 0.0});
  const DenseMatrix p = softmax_rows(logits);
  CHECK(p.all_finite());
  CHECK(std::abs(p(0, 0) - 1.0) < 1e-9);
  CHECK(std::abs(p(0, 1)) < 1e-9);
}

TEST_CASE("softmax matches extended-precision oracle") {
  const std::vector<double> row = {1.0, 2.0, 3.0};
  const DenseMatrix logits(1, 3, std::vector<double>(row));
  const DenseMatrix p = softmax_rows(logits);
  const std::vector<double> expect = oracles::softmax_longdouble(row);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(p(0, j) - expect[j]) < 1e-15);
}

TEST_CASE("softmax rows sum to one and shift invariance") {
  RngStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix logits = random_matrix(4, 7, rng, 3.0);
    const DenseMatrix p = softmax_rows(logits);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < p.cols(); ++j) sum += p(i, j);
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    DenseMatrix shifted = logits;
    const double c = rng.normal(0.0, 10.0);
    for (std::size_t i = 0; i < shifted.rows(); ++i) {
      for (std::size_t j = 0; j < shifted.cols(); ++j) shifted(i, j) += c;
    }
    const DenseMatrix q = softmax_rows(shifted);
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(std::abs(p.data()[k] - q.data()[k]) < 1e-9);
    }
  }
}

TEST_CASE("backward of x squared") {
  Tape t;
  const ValueId x = t.leaf(DenseMatrix(1, 1, {3.0}), true);
  const ValueId loss = t.sum_all(t.mul(x, x));
  t.backward(loss);
  CHECK(t.grad(x)(0, 0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward of constant loss gives zero gradients") {
  Tape t;
  const ValueId x = t.leaf(DenseMatrix(2, 2, 1.5), true);
  const ValueId c = t.constant(DenseMatrix(2, 2, 0.0));
  const ValueId loss = t.sum_all(t.mul(x, c));
  t.backward(loss);
  for (std::size_t k = 0; k < 4; ++k) CHECK(t.grad(x).data()[k] == 0.0);
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  const ValueId x = t.leaf(DenseMatrix(2, 2, 1.0), true);
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
}

TEST_CASE("finite_diff_check on quadratic") {
  RngStream rng(5);
  const DenseMatrix x = random_matrix(2, 3, rng);
  const ScalarFn f = [](std::span<const DenseMatrix> ps) {
    double s = 0.0;
    for (std::size_t k = 0; k < ps[0].size(); ++k) s += ps[0].data()[k] * ps[0].data()[k];
    return s;
  };
  DenseMatrix grad(2, 3);
  for (std::size_t k = 0; k < x.size(); ++k) grad.data()[k] = 2.0 * x.data()[k];
  CHECK(finite_diff_check(f, {&x, 1}, {&grad, 1}, 1e-5) < 1e-8);
}

TEST_CASE("finite_diff_check on relu away from zero") {
  const DenseMatrix x(1, 2, {0.7, -0.9});
  const ScalarFn f = [](std::span<const DenseMatrix> ps) {
    double s = 0.0;
    for (std::size_t k = 0; k < ps[0].size(); ++k) s += std::max(0.0, ps[0].data()[k]);
    return s;
  };
  const DenseMatrix grad(1, 2, {1.0, 0.0});
  CHECK(finite_diff_check(f, {&x, 1}, {&grad, 1}, 1e-5) < 1e-6);
}

TEST_CASE("finite_diff_check rejects non-positive step") {
  const DenseMatrix x(1, 1, {1.0});
  const DenseMatrix g(1, 1, {1.0});
  const ScalarFn f = [](std::span<const DenseMatrix>) { return 0.0; };
  CHECK_THROWS_AS(finite_diff_check(f, {&x, 1}, {&g, 1}, 0.0), std::invalid_argument);
}

namespace {

// Builds a 2-layer MLP cross-entropy loss from a parameter pack; used both
// for the tape and for the finite-difference function.
double mlp_ce_loss_value(std::span<const DenseMatrix> params, const DenseMatrix& x,
                         const std::vector<int>& labels) {
  Tape t;
  const ValueId xi = t.constant(x);
  const ValueId w1 = t.constant(params[0]);
  const ValueId b1 = t.constant(params[1]);
  const ValueId w2 = t.constant(params[2]);
  const ValueId b2 = t.constant(params[3]);
  const ValueId h = t.relu(t.add_rowvec(t.matmul(xi, w1), b1));
  const ValueId logits = t.add_rowvec(t.matmul(h, w2), b2);
  DenseMatrix onehot(x.rows(), t.value(logits).cols(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) onehot(i, labels[i]) = 1.0;
  const ValueId picked = t.sum_all(t.mul(t.log_softmax(logits), t.constant(std::move(onehot))));
  const ValueId loss = t.scale(picked, -1.0 / static_cast<double>(x.rows()));
  return t.value(loss)(0, 0);
}

}  // namespace

TEST_CASE("two-layer MLP cross-entropy gradients match finite differences") {
  RngStream rng(17);
  const DenseMatrix x = random_matrix(6, 4, rng);
  const std::vector<int> labels = {0, 2, 1, 2, 0, 1};
  std::vector<DenseMatrix> params = {random_matrix(4, 5, rng, 0.5), random_matrix(1, 5, rng, 0.1),
                                     random_matrix(5, 3, rng, 0.5), random_matrix(1, 3, rng, 0.1)};

  Tape t;
  const ValueId xi = t.constant(x);
  const ValueId w1 = t.leaf(params[0], true);
  const ValueId b1 = t.leaf(params[1], true);
  const ValueId w2 = t.leaf(params[2], true);
  const ValueId b2 = t.leaf(params[3], true);
  const ValueId h = t.relu(t.add_rowvec(t.matmul(xi, w1), b1));
  const ValueId logits = t.add_rowvec(t.matmul(h, w2), b2);
  DenseMatrix onehot(x.rows(), 3, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) onehot(i, labels[i]) = 1.0;
  const ValueId picked = t.sum_all(t.mul(t.log_softmax(logits), t.constant(std::move(onehot))));
  const ValueId loss = t.scale(picked, -1.0 / 6.0);
  t.backward(loss);

  const std::vector<DenseMatrix> grads = {t.grad(w1), t.grad(b1), t.grad(w2), t.grad(b2)};
  const ScalarFn f = [&](std::span<const DenseMatrix> ps) {
    return mlp_ce_loss_value(ps, x, labels);
  };
  CHECK(finite_diff_check(f, params, grads, 1e-5) < 1e-4);
}

TEST_CASE("every primitive passes a finite-difference probe") {
  RngStream rng(23);
  const auto check_one = [&](const char* name, std::size_t rows, std::size_t cols, auto build,
                             double shift = 0.0) {
    DenseMatrix x0 = random_matrix(rows, cols, rng, 0.7);
    if (shift != 0.0) {
      for (std::size_t k = 0; k < x0.size(); ++k) x0.data()[k] = std::abs(x0.data()[k]) + shift;
    }
    Tape t;
    const ValueId x = t.leaf(x0, true);
    const ValueId y = build(t, x);
    const ValueId loss = t.mean_all(t.mul(y, y));
    t.backward(loss);
    const DenseMatrix analytic = t.grad(x);
    const ScalarFn f = [&](std::span<const DenseMatrix> ps) {
      Tape t2;
      const ValueId x2 = t2.leaf(ps[0], false);
      const ValueId y2 = build(t2, x2);
      const ValueId l2 = t2.mean_all(t2.mul(y2, y2));
      return t2.value(l2)(0, 0);
    };
    INFO(name);
    CHECK(finite_diff_check(f, {&x0, 1}, {&analytic, 1}, 1e-6) < 1e-5);
  };

  check_one("transpose", 3, 4, [](Tape& t, ValueId x) { return t.transpose(x); });
  check_one("scale", 3, 4, [](Tape& t, ValueId x) { return t.scale(x, -1.7); });
  check_one("add_scalar", 3, 4, [](Tape& t, ValueId x) { return t.add_scalar(x, 0.3); });
  check_one("tanh", 3, 4, [](Tape& t, ValueId x) { return t.tanh_elem(x); });
  check_one("sqrt", 3, 4, [](Tape& t, ValueId x) { return t.sqrt_elem(x); }, 0.5);
  check_one("log_softmax", 3, 4, [](Tape& t, ValueId x) { return t.log_softmax(x); });
  check_one("l2_normalize_rows", 3, 4, [](Tape& t, ValueId x) { return t.l2_normalize_rows(x); });
  check_one("row_sum", 3, 4, [](Tape& t, ValueId x) { return t.row_sum(x); });
  check_one("col_mean", 3, 4, [](Tape& t, ValueId x) { return t.col_mean(x); });
  check_one("slice_rows", 4, 3, [](Tape& t, ValueId x) { return t.slice_rows(x, 1, 2); });
  check_one("reshape", 3, 4, [](Tape& t, ValueId x) { return t.reshape(x, 4, 3); });
  check_one("concat_self_rows", 3, 4,
            [](Tape& t, ValueId x) { return t.concat_rows(x, t.scale(x, 2.0)); });
  check_one("concat_self_cols", 3, 4,
            [](Tape& t, ValueId x) { return t.concat_cols(x, t.scale(x, -0.5)); });
  check_one("matmul_self", 3, 3,
            [](Tape& t, ValueId x) { return t.matmul(x, t.transpose(x)); });
  check_one("add_rowvec", 3, 4,
            [](Tape& t, ValueId x) { return t.add_rowvec(x, t.col_mean(x)); });
  check_one("div_rowvec", 3, 4,
            [](Tape& t, ValueId x) {
              return t.div_rowvec(x, t.add_scalar(t.sqrt_elem(t.col_mean(t.mul(x, x))), 0.1));
            },
            0.4);
  check_one("im2col", 2, 6 * 6,
            [](Tape& t, ValueId x) {
              return t.im2col(x, ConvGeom{6, 6, 1, 3, 2, 1});
            });
}

TEST_CASE("dropout primitive applies mask and scales grads") {
  RngStream rng(29);
  Tape t;
  DenseMatrix x0 = random_matrix(4, 4, rng);
  DenseMatrix mask(4, 4);
  for (std::size_t k = 0; k < mask.size(); ++k) mask.data()[k] = (k % 3 == 0) ? 0.0 : 2.0;
  const ValueId x = t.leaf(x0, true);
  const ValueId y = t.dropout(x, mask);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    CHECK(t.value(y).data()[k] == doctest::Approx(x0.data()[k] * mask.data()[k]));
  }
  const ValueId loss = t.mean_all(y);
  t.backward(loss);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    CHECK(t.grad(x).data()[k] == doctest::Approx(mask.data()[k] / 16.0));
  }
}

TEST_CASE("rng determinism across instances") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RngStream c(42), d(43);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal &= (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("rng split is independent of draw position") {
  RngStream a(9);
  const RngStream child_before = a.split(5);
  a.next_u64();
  a.next_u64();
  RngStream child_after = a.split(5);
  RngStream cb = child_before;
  CHECK(cb.next_u64() == child_after.next_u64());
}

TEST_CASE("rng uniform and below ranges") {
  RngStream rng(1234);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(17) < 17);
  }
}

TEST_CASE("deterministic tape pipeline is bit-identical across runs") {
  const auto run = [] {
    RngStream rng(77);
    Tape t;
    const ValueId x = t.leaf(random_matrix(5, 6, rng), true);
    const ValueId w = t.leaf(random_matrix(6, 4, rng), true);
    const ValueId y = t.log_softmax(t.matmul(t.relu(x), w));
    const ValueId loss = t.mean_all(t.mul(y, y));
    t.backward(loss);
    std::vector<double> out;
    out.push_back(t.value(loss)(0, 0));
    for (std::size_t k = 0; k < t.grad(w).size(); ++k) out.push_back(t.grad(w).data()[k]);
    return out;
  };
  const auto r1 = run();
  const auto r2 = run();
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);
}
