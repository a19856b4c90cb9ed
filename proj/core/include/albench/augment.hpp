#pragma once

#include <span>
#include <vector>

#include "albench/pool.hpp"
#include "albench/rng.hpp"

namespace albench {

/// Stochastic view-generation pipeline. Crop and flip apply only to
/// image-shaped rows; noise and intensity jitter apply to any feature
/// vector. Outputs stay finite and are re-clipped to [0,1].
struct AugmentationPolicy {
  bool random_crop = false;      // pad then crop back to original size
  std::size_t crop_pad = 4;
  double flip_prob = 0.0;        // horizontal flip
  double noise_sigma = 0.05;     // additive gaussian
  double intensity_jitter = 0.2; // multiplicative, uniform in [1-j, 1+j]

  std::size_t image_height = 0, image_width = 0;  // 0x0: vector data

  /// Policy matched to the pool shape: images get crop+flip+noise+jitter,
  /// plain vectors get noise+jitter.
  static AugmentationPolicy for_pool(const SamplePool& pool, double noise_sigma,
                                     double intensity_jitter, double flip_prob,
                                     std::size_t crop_pad);
};

/// One augmented view of one sample row, driven entirely by the given rng
/// substream.
std::vector<double> augment_row(const AugmentationPolicy& policy, std::span<const double> row,
                                RngStream& rng);

/// Two independently augmented views of the same batch rows.
struct ViewPair {
  DenseMatrix view_a;
  DenseMatrix view_b;
  std::vector<std::size_t> source_indices;
};

/// Per-sample substreams derive from (rng, sample index, view), so the pair
/// for a given sample is reproducible regardless of batch composition.
ViewPair make_view_pair(const AugmentationPolicy& policy, const SamplePool& pool,
                        std::span<const std::size_t> indices, const RngStream& rng);

}  // namespace albench
