#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "albench/strategies.hpp"
#include "albench/synthetic.hpp"
#include "albench/train.hpp"
#include "oracles.hpp"

using namespace albench;

namespace {

DenseMatrix rows_from(std::initializer_list<std::vector<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < c; ++j) m(i, j) = row[j];
    ++i;
  }
  return m;
}

/// Pool + trained-ish linear model fixture for strategy tests.
struct Fixture {
  SamplePool pool;
  LabelOracle oracle;
  IndexPartition partition;
  ProbabilisticClassifier model;
  std::vector<int> known_labels;

  explicit Fixture(std::uint64_t seed, std::size_t n = 30, std::size_t d = 4,
                   std::size_t classes = 3, double dropout = 0.0)
      : model(nullptr) {
    SyntheticSpec spec;
    spec.num_classes = classes;
    spec.dims = d;
    spec.per_class = n / classes;
    spec.spread = 0.25;
    spec.eval_per_class = 0;
    RngStream rng(seed);
    Dataset ds = synth_gaussian_mixture(spec, rng);
    pool = std::move(ds.pool);
    oracle = std::move(ds.oracle);
    partition = IndexPartition(pool.size());
    known_labels.assign(pool.size(), -1);

    EncoderSpec enc;
    enc.kind = EncoderSpec::Kind::kMlp;
    enc.input_dim = d;
    enc.hidden = {6, 5};
    model = ProbabilisticClassifier(make_encoder(enc), classes, dropout);
    RngStream init(seed + 1);
    model.init(init);
    model.head_w().fill_normal(init, 0.0, 0.4);
  }

  void annotate_some(std::vector<std::size_t> indices) {
    BudgetLedger ledger(pool.size(), 1, 2, pool.size());
    const std::vector<int> labels = annotate(partition, ledger, oracle, indices);
    for (std::size_t i = 0; i < indices.size(); ++i) known_labels[indices[i]] = labels[i];
  }

  SelectionRequest request(std::size_t b, std::uint64_t rng_seed = 7) {
    SelectionRequest r;
    r.batch_size = b;
    r.pool = &pool;
    r.partition = &partition;
    r.model = &model;
    r.known_labels = known_labels;
    r.rng = RngStream(rng_seed);
    return r;
  }

 private:
  Fixture();
};

}  // namespace

TEST_CASE("entropy scores: uniform, one-hot, two-point") {
  DenseMatrix p = rows_from({{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7},
                             {1, 0, 0, 0, 0, 0, 0},
                             {0.5, 0.5, 0, 0, 0, 0, 0}});
  const ScoreTable t = score_entropy(p);
  CHECK(t.orientation == ScoreOrientation::kHigherSelected);
  CHECK(t.scores[0] == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(std::abs(t.scores[0] - 1.94591) < 1e-5);
  CHECK(t.scores[1] == doctest::Approx(0.0));
  CHECK(t.scores[2] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("entropy rejects genuinely negative probabilities") {
  DenseMatrix p = rows_from({{1.1, -0.1}});
  CHECK_THROWS_AS(score_entropy(p), std::invalid_argument);
  // tiny numeric negatives are tolerated
  DenseMatrix ok = rows_from({{1.0, -1e-12}});
  CHECK_NOTHROW(score_entropy(ok));
}

TEST_CASE("margin scores: direct, tie, one-hot") {
  DenseMatrix p = rows_from({{0.6, 0.3, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {1, 0, 0}});
  const ScoreTable t = score_margin(p);
  CHECK(t.orientation == ScoreOrientation::kLowerSelected);
  CHECK(t.scores[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.scores[1] == doctest::Approx(0.0));
  CHECK(t.scores[2] == doctest::Approx(1.0));
}

TEST_CASE("least confidence scores: direct, uniform, one-hot") {
  DenseMatrix p = rows_from({{0.6, 0.3, 0.1},
                             {1.0 / 7, 1.0 / 7, 1.0 / 7},
                             {1, 0, 0}});
  // note: the uniform row here is only 3-wide; use K=7 uniform separately
  const ScoreTable t = score_least_confidence(p);
  CHECK(t.orientation == ScoreOrientation::kLowerSelected);
  CHECK(t.scores[0] == doctest::Approx(0.6));
  CHECK(t.scores[2] == doctest::Approx(1.0));

  DenseMatrix uniform7(1, 7, 1.0 / 7);
  CHECK(score_least_confidence(uniform7).scores[0] == doctest::Approx(1.0 / 7].epsilon(1e-12));
}

TEST_CASE("select_by_score basics and tie rule") {
  ScoreTable t;
  t.scores = {3, 1, 2};
  t.orientation = ScoreOrientation::kHigherSelected;
  CHECK(select_by_score(t, 2) == std::vector<std::size_t>{0, 2});

  ScoreTable ties;
  ties.scores = {5, 5, 5};
  ties.orientation = ScoreOrientation::kLowerSelected;
  CHECK(select_by_score(ties, 2) == std::vector<std::size_t>{0, 1});

  CHECK_THROWS_AS(select_by_score(ties, 4), std::invalid_argument);
}

TEST_CASE("select_by_score matches a full-sort oracle on random tables") {
  RngStream rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    ScoreTable t;
    const std::size_t n = 3 + rng.below(12);
    t.scores.resize(n);
    for (double& s : t.scores) s = std::floor(rng.uniform() * 8.0);  // force ties
    t.orientation = rng.below(2) ? ScoreOrientation::kHigherSelected
                                 : ScoreOrientation::kLowerSelected;
    const std::size_t b = 1 + rng.below(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const bool higher = t.orientation == ScoreOrientation::kHigherSelected;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t bb) {
      if (t.scores[a] != t.scores[bb]) {
        return higher ? t.scores[a] > t.scores[bb] : t.scores[a] < t.scores[bb];
      }
      return a < bb;
    });
    order.resize(b);
    CHECK(select_by_score(t, b) == order);
  }
}

TEST_CASE("monotone transforms never change the chosen set") {
  RngStream rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreTable t;
    t.scores.resize(10);
    for (double& s : t.scores) s = rng.normal(0.0, 2.0);
    t.orientation = rng.below(2) ? ScoreOrientation::kHigherSelected
                                 : ScoreOrientation::kLowerSelected;
    const std::size_t b = 1 + rng.below(10);
    const auto base = select_by_score(t, b);

    ScoreTable mapped = t;
    for (double& s : mapped.scores) s = std::exp(0.5 * s) + 3.0;  // strictly increasing
    CHECK(select_by_score(mapped, b) == base);
  }
}

TEST_CASE("K=2 entropy, margin and least confidence select identically") {
  RngStream rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 6 + rng.below(10);
    DenseMatrix p(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform();
      p(i, 0) = a;
      p(i, 1) = 1.0 - a;
    }
    for (std::size_t b = 1; b <= n; ++b) {
      auto h = select_by_score(score_entropy(p), b);
      auto m = select_by_score(score_margin(p), b);
      auto l = select_by_score(score_least_confidence(p), b);
      std::sort(h.begin(), h.end());
      std::sort(m.begin(), m.end());
      std::sort(l.begin(), l.end());
      CHECK(h == m);
      CHECK(m == l);
    }
  }
}

TEST_CASE("bald mutual information cases") {
  SUBCASE("identical passes give zero") {
    DenseMatrix p = rows_from({{0.2, 0.5, 0.3}, {0.9, 0.05, 0.05}});
    const ScoreTable t = score_bald({p, p, p});
    for (double s : t.scores) CHECK(std::abs(s) < 1e-9);
  }
  SUBCASE("maximally disagreeing passes give ln 2") {
    DenseMatrix p1 = rows_from({{1.0, 0.0}});
    DenseMatrix p2 = rows_from({{0.0, 1.0}});
    const ScoreTable t = score_bald({p1, p2});
    CHECK(t.scores[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("bounds hold on random tensors") {
    RngStream rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t t_passes = 2 + rng.below(5);
      const std::size_t k = 2 + rng.below(5);
      std::vector<DenseMatrix> passes;
      for (std::size_t t = 0; t < t_passes; ++t) {
        DenseMatrix p(1, k);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          p(0, j) = -std::log(1.0 - rng.uniform());
          sum += p(0, j);
        }
        for (std::size_t j = 0; j < k; ++j) p(0, j) /= sum;
        passes.push_back(std::move(p));
      }
      const double mi = score_bald(passes).scores[0];
      CHECK(mi >= -1e-9);
      CHECK(mi <= std::log(static_cast<double>(k)) + 1e-9);
    }
  }
}

TEST_CASE("random selection: full pool, determinism, frequencies") {
  Fixture fx(31);
  SUBCASE("b equals the unlabeled size selects everything") {
    const SelectionResult r = select_random(fx.request(fx.pool.size()));
    CHECK(r.chosen.size() == fx.pool.size());
    std::set<std::size_t> unique(r.chosen.begin(), r.chosen.end());
    CHECK(unique.size() == fx.pool.size());
  }
  SUBCASE("fixed seed reproduces") {
    const SelectionResult a = select_random(fx.request(5, 42));
    const SelectionResult b = select_random(fx.request(5, 42));
    CHECK(a.chosen == b.chosen);
  }
  SUBCASE("frequencies are uniform") {
    // 5 unlabeled candidates: restrict by labeling the rest
    Fixture small(32, 30, 4, 3);
    std::vector<std::size_t> to_label;
    for (std::size_t i = 5; i < small.pool.size(); ++i) to_label.push_back(i);
    small.annotate_some(to_label);
    std::vector<int> hits(5, 0);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const SelectionResult r = select_random(small.request(1, seed));
      hits[r.chosen[0]]++;
    }
    for (int h : hits) {
      CHECK(h > 2000 - 150);
      CHECK(h < 2000 + 150);
    }
  }
}

TEST_CASE("badge k-means++ behavior") {
  SUBCASE("a far-out gradient point is always selected") {
    // craft a pool of 3 candidates: two identical rows, one distant
    Fixture fx(41, 30, 4, 3);
    for (std::size_t j = 0; j < 4; ++j) {
      fx.pool.features(0, j) = 0.2;
      fx.pool.features(1, j) = 0.2;  // identical to candidate 0
      fx.pool.features(2, j) = 0.9;  // far away
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 3; i < fx.pool.size(); ++i) rest.push_back(i);
    fx.annotate_some(rest);

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const SelectionResult r = select_badge(fx.request(2, seed));
      CHECK(r.chosen.size() == 2);
      CHECK(std::count(r.chosen.begin(), r.chosen.end(), 2UL) == 1);
    }
  }
  SUBCASE("seeded runs reproduce") {
    Fixture fx(42);
    const SelectionResult a = select_badge(fx.request(4, 3));
    const SelectionResult b = select_badge(fx.request(4, 3));
    CHECK(a.chosen == b.chosen);
  }
  SUBCASE("batch larger than候 candidate count is rejected") {
    Fixture fx(43);
    CHECK_THROWS_AS(select_badge(fx.request(fx.pool.size() + 1)), std::invalid_argument);
  }
}

TEST_CASE("coreset greedy on a line") {
  // pool values {0, 1, 10} in 1-d raw space
  Fixture fx(51, 30, 1, 3);
  fx.pool.features(0, 0) = 0.0;
  fx.pool.features(1, 0) = 0.1;   // value 1 on a 0..10 scale
  fx.pool.features(2, 0) = 1.0;   // value 10
  std::vector<std::size_t> rest;
  for (std::size_t i = 3; i < fx.pool.size(); ++i) rest.push_back(i);
  fx.annotate_some(rest);
  fx.annotate_some({0});  // center = point at 0

  SelectionRequest req = fx.request(1);
  req.params.coreset_raw_features = true;
  const SelectionResult one = select_coreset(req);
  CHECK(one.chosen == std::vector<std::size_t>{2});  // farthest point first

  SelectionRequest req2 = fx.request(2);
  req2.params.coreset_raw_features = true;
  const SelectionResult two = select_coreset(req2);
  CHECK(two.chosen == std::vector<std::size_t>{2, 1});
}

TEST_CASE("coreset requires a labeled center") {
  Fixture fx(52);
  CHECK_THROWS_WITH_AS(select_coreset(fx.request(2)), doctest::Contains("cold-start"),
                       std::invalid_argument);
}

TEST_CASE("greedy coreset radius is within 2x of brute-force optimal") {
  RngStream rng(53);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 6 + rng.below(7);   // up to 12
    const std::size_t b = 1 + rng.below(3);   // up to 3
    Fixture fx(54 + instance, 30, 3, 3);
    // shrink to n candidates + 1 labeled center by labeling the tail
    std::vector<std::size_t> rest;
    for (std::size_t i = n + 1; i < fx.pool.size(); ++i) rest.push_back(i);
    fx.annotate_some(rest);
    fx.annotate_some({0});

    SelectionRequest req = fx.request(b, instance);
    req.params.coreset_raw_features = true;
    const SelectionResult r = select_coreset(req);

    // radius over the first n+1 points only (the sub-instance)
    DenseMatrix points(n + 1, 3);
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < 3; ++j) points(i, j) = fx.pool.features(i, j);
    }
    std::vector<std::size_t> centers = {0};
    centers.insert(centers.end(), r.chosen.begin(), r.chosen.end());
    const double greedy = oracles::k_center_radius(points, centers);
    const double optimal = oracles::optimal_k_center_radius(points, {0}, b);
    CHECK(greedy <= 2.0 * optimal + 1e-12);
  }
}

TEST_CASE("coreset selection is permutation covariant") {
  Fixture fx(55, 24, 3, 3);
  fx.annotate_some({0, 1});
  SelectionRequest req = fx.request(3, 5);
  req.params.coreset_raw_features = true;
  const SelectionResult base = select_coreset(req);

  // reverse the pool rows; labeled <-> mapped; expect mapped chosen set
  const std::size_t n = fx.pool.size();
  Fixture rev(55, 24, 3, 3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      rev.pool.features(i, j) = fx.pool.features(n - 1 - i, j);
    }
  }
  rev.annotate_some({n - 1, n - 2});
  SelectionRequest req2 = rev.request(3, 5);
  req2.params.coreset_raw_features = true;
  const SelectionResult mapped = select_coreset(req2);

  std::vector<std::size_t> expect;
  for (std::size_t idx : base.chosen) expect.push_back(n - 1 - idx);
  std::sort(expect.begin(), expect.end());
  std::vector<std::size_t> got(mapped.chosen.begin(), mapped.chosen.end());
  std::sort(got.begin(), got.end());
  CHECK(got == expect);
}

TEST_CASE("deepfool matches the closed-form distance for binary linear models") {
  RngStream rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    EncoderSpec enc;
    enc.kind = EncoderSpec::Kind::kIdentity;
    enc.input_dim = 3;
    ProbabilisticClassifier model(make_encoder(enc), 2, 0.0);
    model.head_w().fill_normal(rng, 0.0, 1.0);
    model.head_b().fill_normal(rng, 0.0, 0.3);

    std::vector<double> x(3);
    for (double& v : x) v = rng.normal(0.0, 1.0);

    // effective boundary: (w1 - w0) . x + (b1 - b0) = 0
    std::vector<double> w(3);
    for (std::size_t j = 0; j < 3; ++j) w[j] = model.head_w()(1, j) - model.head_w()(0, j);
    const double db = model.head_b()(0, 1) - model.head_b()(0, 0);
    double dot = db, norm = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      dot += w[j] * x[j];
      norm += w[j] * w[j];
    }
    const double expect = std::abs(dot) / std::sqrt(norm);

    const DeepFoolOutcome probe = deepfool_probe(model, x, 20, 0.02);
    CHECK(probe.flipped);
    CHECK(probe.perturbation_norm == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("deepfool flips immediately on a boundary sample") {
  EncoderSpec enc;
  enc.kind = EncoderSpec::Kind::kIdentity;
  enc.input_dim = 2;
  ProbabilisticClassifier model(make_encoder(enc), 2, 0.0);
  model.head_w()(0, 0) = 1.0;
  model.head_w()(1, 1) = 1.0;
  // logits are (x0, x1): the diagonal is the boundary; sit 1e-9 off it
  const std::vector<double> x = {0.5 + 1e-9, 0.5};
  const DeepFoolOutcome probe = deepfool_probe(model, x, 10, 0.02);
  CHECK(probe.flipped);
  CHECK(probe.iterations == 1);
  CHECK(probe.perturbation_norm < 1e-6);
}

TEST_CASE("deepfool scores scale with consistent input/bias scaling") {
  EncoderSpec enc;
  enc.kind = EncoderSpec::Kind::kIdentity;
  enc.input_dim = 3;
  RngStream rng(63);
  ProbabilisticClassifier model(make_encoder(enc), 2, 0.0);
  model.head_w().fill_normal(rng, 0.0, 1.0);
  model.head_b().fill_normal(rng, 0.0, 0.2);
  const std::vector<double> x = {0.4, -0.7, 0.2};
  const double base = deepfool_probe(model, x, 20, 0.02).perturbation_norm;

  const double alpha = 3.5;
  ProbabilisticClassifier scaled = model;
  for (std::size_t j = 0; j < 2; ++j) scaled.head_b()(0, j) *= alpha;
  std::vector<double> xs = x;
  for (double& v : xs) v *= alpha;
  const double big = deepfool_probe(scaled, xs, 20, 0.02).perturbation_norm;
  CHECK(big == doctest::Approx(alpha * base).epsilon(1e-6));
}

TEST_CASE("deepfool rejects zero max_iters and hands back sentinel when stuck") {
  Fixture fx(64);
  CHECK_THROWS_AS(deepfool_probe(fx.model, fx.pool.features.row(0), 0, 0.02),
                  std::invalid_argument);

  // constant model never flips
  EncoderSpec enc;
  enc.kind = EncoderSpec::Kind::kIdentity;
  enc.input_dim = 2;
  ProbabilisticClassifier constant(make_encoder(enc), 2, 0.0);
  const std::vector<double> x = {0.3, 0.4};
  const DeepFoolOutcome probe = deepfool_probe(constant, x, 5, 0.02);
  CHECK_FALSE(probe.flipped);

  SelectionRequest req = fx.request(1);
  req.model = &constant;
  // a request against the constant model scores everything at the sentinel
  Fixture cfx(65, 30, 2, 3);
  SelectionRequest creq = cfx.request(2);
  ProbabilisticClassifier const2(make_encoder(enc), 3, 0.0);
  creq.model = &const2;
  const SelectionResult r = select_deepfool(creq);
  REQUIRE(r.scores.has_value());
  for (double s : r.scores->scores) CHECK(s == kDeepFoolNoFlip);
  // tie-break falls back to lowest index
  CHECK(r.chosen == std::vector<std::size_t>{0, 1});
}

TEST_CASE("glister prefers the gradient-aligned candidate") {
  // identity encoder, 2 classes; validation gradient direction is known
  Fixture fx(71, 30, 2, 2);
  fx.annotate_some({0, 1, 15, 16});  // two per class (blocks of 15)
  const SelectionResult r = select_glister(fx.request(1, 3));
  CHECK(r.chosen.size() == 1);
  CHECK_FALSE(fx.partition.is_labeled(r.chosen[0]));
}

TEST_CASE("glister b=1 matches the exhaustive one-step oracle") {
  RngStream meta(73);
  int checked = 0;
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t classes = 2 + meta.below(2);
    Fixture fx(100 + instance, 8 + classes * 2, 3, classes);
    // label a handful, keep |U| <= 10
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < fx.pool.size() - 10; ++i) labeled.push_back(i);
    fx.annotate_some(labeled);

    const double lr = 1e-4;
    SelectionRequest req = fx.request(1, instance);
    req.params.glister_lr = lr;
    const SelectionResult r = select_glister(req);

    // oracle: the validation shard selection must match the strategy's; it
    // is derived from the same request stream
    RngStream shard_rng = RngStream(static_cast<std::uint64_t>(instance)).split(0x611);
    std::size_t val_count = static_cast<std::size_t>(
        std::llround(req.params.glister_val_fraction * static_cast<double>(labeled.size())));
    val_count = std::clamp<std::size_t>(val_count, 1, labeled.size());
    const std::vector<std::size_t> val_pos =
        sample_without_replacement(labeled.size(), val_count, shard_rng);

    std::vector<std::size_t> val_idx;
    for (std::size_t p : val_pos) val_idx.push_back(fx.partition.labeled()[p]);

    const auto loss_after_step = [&](std::size_t candidate) {
      // exact one-step update on (W, b) with the candidate's pseudo-label
      DenseMatrix w = fx.model.head_w();
      DenseMatrix b = fx.model.head_b();
      const DenseMatrix h =
          fx.model.embed(gather_rows(fx.pool.features, std::vector<std::size_t>{candidate}));
      DenseMatrix logits = matmul(h, transpose(w));
      for (std::size_t j = 0; j < logits.cols(); ++j) logits(0, j) += b(0, j);
      const DenseMatrix p = softmax_rows(logits);
      std::size_t pseudo = 0;
      for (std::size_t j = 1; j < p.cols(); ++j) {
        if (p(0, j) > p(0, pseudo)) pseudo = j;
      }
      for (std::size_t c = 0; c < w.rows(); ++c) {
        const double coeff = p(0, c) - (c == pseudo ? 1.0 : 0.0);
        b(0, c) -= lr * coeff;
        for (std::size_t j = 0; j < w.cols(); ++j) w(c, j) -= lr * coeff * h(0, j);
      }
      // validation cross-entropy under the stepped parameters
      const DenseMatrix hv = fx.model.embed(gather_rows(fx.pool.features, val_idx));
      DenseMatrix lv = matmul(hv, transpose(w));
      for (std::size_t i = 0; i < lv.rows(); ++i) {
        for (std::size_t j = 0; j < lv.cols(); ++j) lv(i, j) += b(0, j);
      }
      const DenseMatrix pv = softmax_rows(lv);
      double loss = 0.0;
      for (std::size_t i = 0; i < val_idx.size(); ++i) {
        loss -= std::log(pv(i, fx.known_labels[val_idx[i]]));
      }
      return loss / static_cast<double>(val_idx.size());
    };

    std::size_t best = fx.partition.unlabeled()[0];
    double best_loss = loss_after_step(best);
    for (std::size_t idx : fx.partition.unlabeled()) {
      const double l = loss_after_step(idx);
      if (l < best_loss - 1e-15) {
        best = idx;
        best_loss = l;
      }
    }
    CHECK(r.chosen[0] == best);
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("glister zero validation gradient falls back to lowest index") {
  Fixture fx(75, 20, 2, 2);
  fx.annotate_some({0, 10});
  // make every prediction exactly uniform and validation gradient zero:
  // zero head on a symmetric validation pair (one sample per class)
  fx.model.head_w().fill(0.0);
  fx.model.head_b().fill(0.0);
  // embed() of the two val samples differ, but with a zero head p = uniform;
  // mean gradient over one sample of each class cancels only if their
  // embeddings match, so instead shrink validation to a deterministic single
  // sample and rely on score ties across candidates:
  // with a zero head every candidate's pseudo-label is class 0 (tie-break)
  // and all scores coincide, so the chosen index must be the lowest
  const SelectionResult r = select_glister(fx.request(1, 9));
  CHECK(r.chosen[0] == fx.partition.unlabeled()[0]);
}

TEST_CASE("all strategies satisfy the selection contract") {
  Fixture fx(81, 30, 4, 3, /*dropout=*/0.2);
  fx.annotate_some({0, 1, 10, 11, 20, 21});
  const std::size_t b = 4;

  for (const std::string& id : strategy_ids()) {
    INFO(id);
    const SelectionResult r1 = run_strategy(id, fx.request(b, 17));
    const SelectionResult r2 = run_strategy(id, fx.request(b, 17));
    CHECK(r1.chosen == r2.chosen);  // deterministic under fixed seed
    CHECK(r1.chosen.size() == b);
    std::set<std::size_t> unique(r1.chosen.begin(), r1.chosen.end());
    CHECK(unique.size() == b);  // no duplicates
    for (std::size_t idx : r1.chosen) {
      CHECK_FALSE(fx.partition.is_labeled(idx));  // chosen within unlabeled
    }
    CHECK(r1.strategy_id == id);
  }
}

TEST_CASE("unknown strategy id is rejected") {
  Fixture fx(82);
  CHECK_THROWS_WITH_AS(run_strategy("gradient_descent", fx.request(1)),
                       doctest::Contains("gradient_descent"), std::invalid_argument);
}

TEST_CASE("parallel scoring equals sequential scoring") {
  Fixture fx(83, 60, 4, 3, /*dropout=*/0.2);
  fx.annotate_some({0, 1, 20, 21, 40, 41});
  for (const std::string& id : {"entropy", "margin", "least_confidence", "bald", "deepfool"}) {
    INFO(id);
    SelectionRequest seq = fx.request(5, 3);
    seq.params.score_threads = 1;
    SelectionRequest par = fx.request(5, 3);
    par.params.score_threads = 4;
    const SelectionResult a = run_strategy(id, seq);
    const SelectionResult c = run_strategy(id, par);
    CHECK(a.chosen == c.chosen);
    REQUIRE(a.scores.has_value());
    REQUIRE(c.scores.has_value());
    for (std::size_t i = 0; i < a.scores->scores.size(); ++i) {
      CHECK(a.scores->scores[i] == c.scores->scores[i]);  // bit-identical
    }
  }
  // greedy strategies run their scoring shards in parallel too
  for (const std::string& id : {"badge", "coreset", "glister"}) {
    INFO(id);
    SelectionRequest seq = fx.request(5, 3);
    seq.params.score_threads = 1;
    SelectionRequest par = fx.request(5, 3);
    par.params.score_threads = 4;
    CHECK(run_strategy(id, seq).chosen == run_strategy(id, par).chosen);
  }
}

TEST_CASE("candidate cap restricts scoring to a subset") {
  Fixture fx(84, 60, 4, 3);
  fx.annotate_some({0, 1});
  SelectionRequest req = fx.request(3, 11);
  req.params.candidate_cap = 10;
  const SelectionResult r = select_entropy(req);
  CHECK(r.chosen.size() == 3);
  CHECK(r.scored_candidates.size() == 10);
  for (std::size_t idx : r.chosen) CHECK_FALSE(fx.partition.is_labeled(idx));
}

TEST_CASE("batch size larger than the unlabeled pool is rejected") {
  Fixture fx(85, 12, 3, 3);
  std::vector<std::size_t> most;
  for (std::size_t i = 0; i < 10; ++i) most.push_back(i);
  fx.annotate_some(most);
  CHECK_THROWS_AS(select_random(fx.request(3)), std::invalid_argument);
}
