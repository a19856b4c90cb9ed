#include "albench/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace albench {

namespace {

void validate_request(const SelectionRequest& r, bool needs_model) {
  if (r.pool == nullptr || r.partition == nullptr) {
    throw std::invalid_argument("selection: request missing pool or partition");
  }
  if (needs_model && r.model == nullptr) {
    throw std::invalid_argument("selection: request missing model");
  }
  if (r.batch_size < 1) throw std::invalid_argument("selection: batch_size must be >= 1");
  if (r.batch_size > r.partition->unlabeled().size()) {
    throw std::invalid_argument("selection: batch " + std::to_string(r.batch_size) +
                                " exceeds unlabeled pool " +
                                std::to_string(r.partition->unlabeled().size()));
  }
}

/// Unlabeled candidates, optionally capped to a random subset.
std::vector<std::size_t> candidate_set(const SelectionRequest& r) {
  const std::vector<std::size_t>& unlabeled = r.partition->unlabeled();
  const std::size_t cap = r.params.candidate_cap;
  if (cap == 0 || cap >= unlabeled.size()) return unlabeled;
  const std::size_t take = std::max(cap, r.batch_size);
  RngStream rng = r.rng.split(0xCA11D);
  std::vector<std::size_t> picks = sample_without_replacement(unlabeled.size(), take, rng);
  std::vector<std::size_t> out(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) out[i] = unlabeled[picks[i]];
  return out;
}

void parallel_over(std::size_t n, std::size_t threads,
                   const std::function<void(std::size_t, std::size_t)>& shard_fn) {
  if (threads <= 1 || n <= 1) {
    shard_fn(0, n);
    return;
  }
  const std::size_t workers = std::min(threads, n);
  const std::size_t per = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * per;
    const std::size_t hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back(shard_fn, lo, hi);
  }
  for (std::thread& t : pool) t.join();
}

SelectionResult from_score_table(const SelectionRequest& r, std::string id,
                                 std::vector<std::size_t> candidates, ScoreTable table) {
  const std::vector<std::size_t> positions = select_by_score(table, r.batch_size);
  SelectionResult result;
  result.strategy_id = std::move(id);
  result.chosen.reserve(positions.size());
  for (std::size_t p : positions) result.chosen.push_back(candidates[p]);
  result.scored_candidates = std::move(candidates);
  result.scores = std::move(table);
  return result;
}

DenseMatrix probabilities_for(const SelectionRequest& r,
                              std::span<const std::size_t> candidates) {
  DenseMatrix out(candidates.size(), r.model->num_classes());
  parallel_over(candidates.size(), r.params.score_threads, [&](std::size_t lo, std::size_t hi) {
    const DenseMatrix p = predict_proba(*r.model, *r.pool, candidates.subspan(lo, hi - lo));
    std::copy(p.data(), p.data() + p.size(), out.data() + lo * out.cols());
  });
  return out;
}

}  // namespace

DenseMatrix embed_rows(const ProbabilisticClassifier& model, const SamplePool& pool,
                       std::span<const std::size_t> indices, std::size_t threads) {
  DenseMatrix out(indices.size(), model.embedding_dim());
  parallel_over(indices.size(), threads, [&](std::size_t lo, std::size_t hi) {
    constexpr std::size_t kChunk = 512;
    for (std::size_t c = lo; c < hi; c += kChunk) {
      const std::size_t ce = std::min(hi, c + kChunk);
      const DenseMatrix h = model.embed(gather_rows(pool.features, indices.subspan(c, ce - c)));
      std::copy(h.data(), h.data() + h.size(), out.data() + c * out.cols());
    }
  });
  return out;
}

SelectionResult select_random(const SelectionRequest& request) {
  validate_request(request, /*needs_model=*/false);
  const std::vector<std::size_t> candidates = candidate_set(request);
  RngStream rng = request.rng.split(0x52);
  const std::vector<std::size_t> picks =
      sample_without_replacement(candidates.size(), request.batch_size, rng);
  SelectionResult result;
  result.strategy_id = "random";
  for (std::size_t p : picks) result.chosen.push_back(candidates[p]);
  return result;
}

SelectionResult select_entropy(const SelectionRequest& request) {
  validate_request(request, true);
  std::vector<std::size_t> candidates = candidate_set(request);
  ScoreTable table = score_entropy(probabilities_for(request, candidates));
  return from_score_table(request, "entropy", std::move(candidates), std::move(table));
}

SelectionResult select_margin(const SelectionRequest& request) {
  validate_request(request, true);
  std::vector<std::size_t> candidates = candidate_set(request);
  ScoreTable table = score_margin(probabilities_for(request, candidates));
  return from_score_table(request, "margin", std::move(candidates), std::move(table));
}

SelectionResult select_least_confidence(const SelectionRequest& request) {
  validate_request(request, true);
  std::vector<std::size_t> candidates = candidate_set(request);
  ScoreTable table = score_least_confidence(probabilities_for(request, candidates));
  return from_score_table(request, "least_confidence", std::move(candidates), std::move(table));
}

SelectionResult select_bald(const SelectionRequest& request) {
  validate_request(request, true);
  std::vector<std::size_t> candidates = candidate_set(request);
  const RngStream mc_rng = request.rng.split(0xBA1D);
  const std::vector<DenseMatrix> passes =
      stochastic_predict(*request.model, *request.pool, candidates, request.params.bald_passes,
                         mc_rng);
  ScoreTable table = score_bald(passes);
  return from_score_table(request, "bald", std::move(candidates), std::move(table));
}

DeepFoolOutcome deepfool_probe(const ProbabilisticClassifier& model, std::span<const double> x,
                               std::size_t max_iters, double overshoot) {
  if (max_iters < 1) throw std::invalid_argument("deepfool: max_iters must be >= 1");
  const std::size_t k = model.num_classes();
  const std::size_t d = x.size();

  const auto argmax_row = [](const DenseMatrix& logits) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (logits(0, j) > logits(0, best)) best = j;
    }
    return best;
  };

  DenseMatrix x0(1, d, std::vector<double>(x.begin(), x.end()));
  const std::size_t original = argmax_row(model.logits(x0));

  std::vector<double> r_total(d, 0.0);
  DenseMatrix x_cur = x0;
  DeepFoolOutcome out;

  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    const DenseMatrix logits = model.logits(x_cur);
    const std::vector<double> grad_orig = model.input_gradient(x_cur.row(0), original);

    // Closest linearized boundary among the other classes.
    double best_ratio = 0.0;
    std::vector<double> best_w;
    double best_f = 0.0;
    bool found = false;
    for (std::size_t cls = 0; cls < k; ++cls) {
      if (cls == original) continue;
      const std::vector<double> grad_cls = model.input_gradient(x_cur.row(0), cls);
      std::vector<double> w(d);
      double w_norm_sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        w[j] = grad_cls[j] - grad_orig[j];
        w_norm_sq += w[j] * w[j];
      }
      if (w_norm_sq < 1e-24) continue;
      const double f = logits(0, cls) - logits(0, original);
      const double ratio = std::abs(f) / std::sqrt(w_norm_sq);
      if (!found || ratio < best_ratio) {
        found = true;
        best_ratio = ratio;
        best_w = std::move(w);
        best_f = f;
      }
    }
    if (!found) break;  // no usable direction: gradients collapsed

    double w_norm_sq = 0.0;
    for (double v : best_w) w_norm_sq += v * v;
    const double step = std::abs(best_f) / w_norm_sq;
    for (std::size_t j = 0; j < d; ++j) r_total[j] += step * best_w[j];

    for (std::size_t j = 0; j < d; ++j) {
      x_cur(0, j) = x0(0, j) + (1.0 + overshoot) * r_total[j];
    }
    out.iterations = iter;
    if (argmax_row(model.logits(x_cur)) != original) {
      out.flipped = true;
      break;
    }
  }

  double norm_sq = 0.0;
  for (double v : r_total) norm_sq += v * v;
  out.perturbation_norm = std::sqrt(norm_sq);
  return out;
}

SelectionResult select_deepfool(const SelectionRequest& request) {
  validate_request(request, true);
  std::vector<std::size_t> candidates = candidate_set(request);
  ScoreTable table;
  table.orientation = ScoreOrientation::kLowerSelected;
  table.scores.assign(candidates.size(), 0.0);
  parallel_over(candidates.size(), request.params.score_threads,
                [&](std::size_t lo, std::size_t hi) {
                  for (std::size_t i = lo; i < hi; ++i) {
                    const DeepFoolOutcome probe = deepfool_probe(
                        *request.model, request.pool->features.row(candidates[i]),
                        request.params.deepfool_max_iters, request.params.deepfool_overshoot);
                    table.scores[i] = probe.flipped ? probe.perturbation_norm : kDeepFoolNoFlip;
                  }
                });
  return from_score_table(request, "deepfool", std::move(candidates), std::move(table));
}

SelectionResult select_badge(const SelectionRequest& request) {
  validate_request(request, true);
  const std::vector<std::size_t> candidates = candidate_set(request);
  const std::size_t n = candidates.size();
  if (request.batch_size > n) {
    throw std::invalid_argument("badge: batch exceeds candidate count");
  }

  // Last-layer gradient embedding at the argmax pseudo-label per candidate.
  const std::size_t dim = request.model->num_classes() * request.model->embedding_dim();
  DenseMatrix g(n, dim);
  const DenseMatrix probs = probabilities_for(request, candidates);
  parallel_over(n, request.params.score_threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t pseudo = 0;
      for (std::size_t j = 1; j < probs.cols(); ++j) {
        if (probs(i, j) > probs(i, pseudo)) pseudo = j;
      }
      const std::vector<double> grad = request.model->last_layer_gradient(
          request.pool->features.row(candidates[i]), static_cast<int>(pseudo));
      std::copy(grad.begin(), grad.end(), g.row(i).begin());
    }
  });

  // k-means++ seeding (D^2 sampling) over the gradient embeddings.
  RngStream rng = request.rng.split(0xBAD6E);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picks;
  picks.reserve(request.batch_size);
  const std::size_t first = static_cast<std::size_t>(rng.below(n));
  picks.push_back(first);
  taken[first] = 1;

  std::vector<double> d2(n, 0.0);
  const auto dist_sq = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    const double* ra = g.row(a).data();
    const double* rb = g.row(b).data();
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = ra[j] - rb[j];
      s += diff * diff;
    }
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) d2[i] = taken[i] ? 0.0 : dist_sq(i, first);

  while (picks.size() < request.batch_size) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t next = n;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          next = i;
          break;
        }
      }
      if (next == n) {  // numeric edge: fall back to the last nonzero weight
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            next = i;
            break;
          }
        }
      }
    }
    if (next == n) {  // all residual distances zero: lowest-index unchosen
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          next = i;
          break;
        }
      }
    }
    taken[next] = 1;
    picks.push_back(next);
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) d2[i] = std::min(d2[i], dist_sq(i, next));
      else d2[i] = 0.0;
    }
  }

  SelectionResult result;
  result.strategy_id = "badge";
  for (std::size_t p : picks) result.chosen.push_back(candidates[p]);
  return result;
}

SelectionResult select_coreset(const SelectionRequest& request) {
  validate_request(request, true);
  if (request.partition->labeled().empty()) {
    throw std::invalid_argument(
        "coreset: labeled set is empty; centers require at least one labeled sample "
        "(cold-start guard)");
  }
  const std::vector<std::size_t> candidates = candidate_set(request);
  const std::vector<std::size_t>& labeled = request.partition->labeled();

  const bool raw = request.params.coreset_raw_features;
  const DenseMatrix cand_emb =
      raw ? gather_rows(request.pool->features, candidates)
          : embed_rows(*request.model, *request.pool, candidates, request.params.score_threads);
  const DenseMatrix lab_emb =
      raw ? gather_rows(request.pool->features, labeled)
          : embed_rows(*request.model, *request.pool, labeled, request.params.score_threads);

  const std::size_t dim = cand_emb.cols();
  const auto dist_sq_rows = [dim](const DenseMatrix& a, std::size_t i, const DenseMatrix& b,
                                  std::size_t j) {
    double s = 0.0;
    const double* ra = a.row(i).data();
    const double* rb = b.row(j).data();
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = ra[d] - rb[d];
      s += diff * diff;
    }
    return s;
  };

  // Min squared distance to any current center (all labeled points start as
  // centers).
  std::vector<double> mind(candidates.size(), std::numeric_limits<double>::infinity());
  parallel_over(candidates.size(), request.params.score_threads,
                [&](std::size_t lo, std::size_t hi) {
                  for (std::size_t i = lo; i < hi; ++i) {
                    for (std::size_t c = 0; c < labeled.size(); ++c) {
                      mind[i] = std::min(mind[i], dist_sq_rows(cand_emb, i, lab_emb, c));
                    }
                  }
                });

  std::vector<char> taken(candidates.size(), 0);
  SelectionResult result;
  result.strategy_id = "coreset";
  for (std::size_t pick = 0; pick < request.batch_size; ++pick) {
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      if (best == candidates.size() || mind[i] > mind[best] ||
          (mind[i] == mind[best] && candidates[i] < candidates[best])) {
        best = i;
      }
    }
    taken[best] = 1;
    result.chosen.push_back(candidates[best]);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!taken[i]) mind[i] = std::min(mind[i], dist_sq_rows(cand_emb, i, cand_emb, best));
    }
  }
  return result;
}

SelectionResult select_glister(const SelectionRequest& request) {
  validate_request(request, true);
  const std::vector<std::size_t>& labeled = request.partition->labeled();
  if (labeled.empty()) {
    throw std::invalid_argument("glister: labeled set is empty (cold-start guard)");
  }

  // Validation shard: a fraction of the current labeled set, refreshed per
  // call from the request stream.
  RngStream shard_rng = request.rng.split(0x611);
  std::size_t val_count = static_cast<std::size_t>(
      std::llround(request.params.glister_val_fraction * static_cast<double>(labeled.size())));
  val_count = std::clamp<std::size_t>(val_count, 1, labeled.size());
  const std::vector<std::size_t> val_pos =
      sample_without_replacement(labeled.size(), val_count, shard_rng);
  std::vector<std::size_t> val_indices(val_count);
  for (std::size_t i = 0; i < val_count; ++i) val_indices[i] = labeled[val_pos[i]];

  std::vector<int> val_labels(val_count);
  for (std::size_t i = 0; i < val_count; ++i) {
    const int label = request.known_labels.empty() ? -1 : request.known_labels[val_indices[i]];
    if (label < 0) {
      throw std::invalid_argument("glister: validation index " + std::to_string(val_indices[i]) +
                                  " has no known label");
    }
    val_labels[i] = label;
  }

  const std::vector<std::size_t> candidates = candidate_set(request);
  const DenseMatrix cand_emb =
      embed_rows(*request.model, *request.pool, candidates, request.params.score_threads);
  const DenseMatrix val_emb =
      embed_rows(*request.model, *request.pool, val_indices, request.params.score_threads);

  // Greedy one-step Taylor selection on a scratch copy of the head.
  DenseMatrix w = request.model->head_w();  // K x e
  DenseMatrix b = request.model->head_b();  // 1 x K
  const std::size_t k = w.rows(), e = w.cols();
  const double lr = request.params.glister_lr;

  const auto probe_probs = [&](const DenseMatrix& emb) {
    DenseMatrix logits(emb.rows(), k, 0.0);
    detail::matmul_nt_into(emb, w, logits);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      for (std::size_t j = 0; j < k; ++j) logits(i, j) += b(0, j);
    }
    return softmax_rows(logits);
  };

  // Mean cross-entropy gradient over the validation shard w.r.t. (W, b).
  const auto val_gradient = [&](DenseMatrix& gw, DenseMatrix& gb) {
    gw = DenseMatrix(k, e, 0.0);
    gb = DenseMatrix(1, k, 0.0);
    const DenseMatrix p = probe_probs(val_emb);
    const double inv = 1.0 / static_cast<double>(val_count);
    for (std::size_t i = 0; i < val_count; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        const double coeff = (p(i, c) - (static_cast<int>(c) == val_labels[i] ? 1.0 : 0.0)) * inv;
        gb(0, c) += coeff;
        for (std::size_t j = 0; j < e; ++j) gw(c, j) += coeff * val_emb(i, j);
      }
    }
  };

  std::vector<char> taken(candidates.size(), 0);
  SelectionResult result;
  result.strategy_id = "glister";
  for (std::size_t pick = 0; pick < request.batch_size; ++pick) {
    DenseMatrix gw, gb;
    val_gradient(gw, gb);
    const DenseMatrix cand_p = probe_probs(cand_emb);

    std::size_t best = candidates.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      std::size_t pseudo = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (cand_p(i, j) > cand_p(i, pseudo)) pseudo = j;
      }
      // <g_i, g_val>: alignment of the candidate's pseudo-labeled step with
      // the validation descent direction.
      double score = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double coeff = cand_p(i, c) - (c == pseudo ? 1.0 : 0.0);
        score += coeff * gb(0, c);
        for (std::size_t j = 0; j < e; ++j) score += coeff * cand_emb(i, j) * gw(c, j);
      }
      if (best == candidates.size() || score > best_score ||
          (score == best_score && candidates[i] < candidates[best])) {
        best = i;
        best_score = score;
      }
    }

    taken[best] = 1;
    result.chosen.push_back(candidates[best]);

    // One inner gradient step on the picked candidate's pseudo-labeled loss,
    // evaluated at the parameters the pick was scored under.
    std::size_t pseudo = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (cand_p(best, j) > cand_p(best, pseudo)) pseudo = j;
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double coeff = cand_p(best, c) - (c == pseudo ? 1.0 : 0.0);
      b(0, c) -= lr * coeff;
      for (std::size_t j = 0; j < e; ++j) w(c, j) -= lr * coeff * cand_emb(best, j);
    }
  }
  return result;
}

SelectionResult run_strategy(const std::string& strategy_id, const SelectionRequest& request) {
  if (strategy_id == "random") return select_random(request);
  if (strategy_id == "entropy") return select_entropy(request);
  if (strategy_id == "margin") return select_margin(request);
  if (strategy_id == "least_confidence") return select_least_confidence(request);
  if (strategy_id == "badge") return select_badge(request);
  if (strategy_id == "glister") return select_glister(request);
  if (strategy_id == "coreset") return select_coreset(request);
  if (strategy_id == "bald") return select_bald(request);
  if (strategy_id == "deepfool") return select_deepfool(request);
  throw std::invalid_argument("unknown strategy '" + strategy_id + "'");
}

const std::vector<std::string>& strategy_ids() {
  static const std::vector<std::string> ids = {
      "random", "entropy", "margin", "least_confidence", "badge",
      "glister", "coreset", "bald",   "deepfool"};
  return ids;
}

}  // namespace albench
