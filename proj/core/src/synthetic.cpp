#include "albench/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace albench {

namespace {

// K unit-norm mean vectors, one per class.
std::vector<std::vector<double>> draw_class_means(std::size_t k, std::size_t dims,
                                                  RngStream& rng) {
  std::vector<std::vector<double>> means(k, std::vector<double>(dims));
  for (auto& m : means) {
    double sq = 0.0;
    for (double& v : m) {
      v = rng.normal();
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    for (double& v : m) v /= norm > 0 ? norm : 1.0;
  }
  return means;
}

std::vector<std::size_t> class_counts(const SyntheticSpec& spec) {
  std::vector<double> ratios = spec.imbalance;
  if (ratios.empty()) ratios.assign(spec.num_classes, 1.0);
  if (ratios.size() != spec.num_classes) {
    throw std::invalid_argument("synthetic: imbalance length " + std::to_string(ratios.size()) +
                                " does not match num_classes " +
                                std::to_string(spec.num_classes));
  }
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] <= 0.0) {
      throw std::invalid_argument("synthetic: imbalance entry " + std::to_string(i) +
                                  " must be > 0");
    }
  }
  const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                      static_cast<double>(ratios.size());
  std::vector<std::size_t> counts(spec.num_classes);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.per_class) * ratios[i] / mean));
    if (counts[i] == 0) counts[i] = 1;
  }
  return counts;
}

void emit_samples(const std::vector<std::vector<double>>& means, double spread,
                  const std::vector<std::size_t>& counts, RngStream& rng, DenseMatrix& features,
                  std::vector<int>& labels) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  features = DenseMatrix(total, means[0].size());
  labels.resize(total);
  std::size_t r = 0;
  for (std::size_t cls = 0; cls < counts.size(); ++cls) {
    for (std::size_t i = 0; i < counts[cls]; ++i, ++r) {
      labels[r] = static_cast<int>(cls);
      for (std::size_t j = 0; j < means[cls].size(); ++j) {
        features(r, j) = means[cls][j] + rng.normal(0.0, spread);
      }
    }
  }
}

}  // namespace

Dataset synth_gaussian_mixture(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.num_classes < 2) throw std::invalid_argument("synthetic: num_classes must be >= 2");
  if (spec.dims < 1) throw std::invalid_argument("synthetic: dims must be >= 1");
  if (spec.per_class < 1) throw std::invalid_argument("synthetic: per_class must be >= 1");
  if (spec.spread <= 0.0) throw std::invalid_argument("synthetic: spread must be > 0");

  RngStream mean_rng = rng.split(0x6d65616e);
  RngStream pool_rng = rng.split(0x706f6f6c);
  RngStream eval_rng = rng.split(0x6576616c);

  const auto means = draw_class_means(spec.num_classes, spec.dims, mean_rng);
  const auto counts = class_counts(spec);

  Dataset out;
  std::vector<int> pool_labels;
  emit_samples(means, spec.spread, counts, pool_rng, out.pool.features, pool_labels);

  const std::vector<std::size_t> eval_counts(spec.num_classes, spec.eval_per_class);
  if (spec.eval_per_class > 0) {
    emit_samples(means, spec.spread, eval_counts, eval_rng, out.eval.features, out.eval.labels);
  }

  // Fit scaling on the pool only; eval reuses it (clipped).
  const MinMaxScale scale = fit_minmax(out.pool.features);
  apply_minmax(out.pool.features, scale);
  if (out.eval.size() > 0) apply_minmax(out.eval.features, scale);

  out.pool.num_classes = spec.num_classes;
  out.pool.dataset_id = "synthetic";
  out.oracle = LabelOracle(std::move(pool_labels));
  return out;
}

void save_synthetic_csv(const std::string& path, const SyntheticSpec& spec, RngStream& rng) {
  const Dataset ds = synth_gaussian_mixture(spec, rng);
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write csv file: " + path);
  outf << "emotion,pixels,Usage\n";
  // Rows are emitted in class blocks, so labels follow from the counts; the
  // sealed oracle is never read.
  const auto counts = class_counts(spec);
  auto write_rows = [&](const DenseMatrix& feats, const std::vector<std::size_t>& per_class,
                        const char* usage) {
    std::size_t r = 0;
    for (std::size_t cls = 0; cls < per_class.size(); ++cls) {
      for (std::size_t i = 0; i < per_class[cls]; ++i, ++r) {
        outf << cls << ',';
        for (std::size_t j = 0; j < feats.cols(); ++j) {
          if (j) outf << ' ';
          outf << static_cast<int>(std::llround(feats(r, j) * 255.0));
        }
        outf << ',' << usage << '\n';
      }
    }
  };
  write_rows(ds.pool.features, counts, "Training");
  if (ds.eval.size() > 0) {
    write_rows(ds.eval.features, std::vector<std::size_t>(spec.num_classes, spec.eval_per_class),
               "PublicTest");
  }
}

}  // namespace albench
