#pragma once

#include <string>
#include <vector>

#include "albench/pool.hpp"
#include "albench/rng.hpp"

namespace albench {

/// Gaussian-mixture pool: class means drawn on the unit sphere, samples
/// i.i.d. Gaussian around their class mean.
struct SyntheticSpec {
  std::size_t num_classes = 2;
  std::size_t dims = 2;
  std::size_t per_class = 100;           // baseline count, scaled by imbalance
  double spread = 0.25;                  // sample std around the class mean
  std::vector<double> imbalance;         // length K ratios; empty = balanced
  std::size_t eval_per_class = 25;       // held-out rows per class
};

/// Generates pool + sealed oracle + eval split. Class i receives
/// round(per_class * imbalance[i] / mean(imbalance)) pool rows. Features are
/// min-max scaled to [0,1] with statistics fitted on the pool; the eval
/// split reuses those statistics. Deterministic in the rng seed.
Dataset synth_gaussian_mixture(const SyntheticSpec& spec, RngStream& rng);

/// Writes a generated pool to the FER-shaped CSV (`emotion,pixels,Usage`)
/// with dims pixel columns, quantizing [0,1] features to 0..255. Pool rows
/// get Usage=Training, eval rows Usage=PublicTest.
void save_synthetic_csv(const std::string& path, const SyntheticSpec& spec, RngStream& rng);

}  // namespace albench
