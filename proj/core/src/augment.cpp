#include "albench/augment.hpp"

#include <algorithm>
#include <stdexcept>

namespace albench {

AugmentationPolicy AugmentationPolicy::for_pool(const SamplePool& pool, double noise_sigma,
                                                double intensity_jitter, double flip_prob,
                                                std::size_t crop_pad) {
  AugmentationPolicy p;
  p.noise_sigma = noise_sigma;
  p.intensity_jitter = intensity_jitter;
  if (pool.image_height > 0 && pool.image_width > 0) {
    p.image_height = pool.image_height;
    p.image_width = pool.image_width;
    p.random_crop = crop_pad > 0;
    p.crop_pad = crop_pad;
    p.flip_prob = flip_prob;
  }
  return p;
}

std::vector<double> augment_row(const AugmentationPolicy& policy, std::span<const double> row,
                                RngStream& rng) {
  std::vector<double> out(row.begin(), row.end());
  const std::size_t h = policy.image_height, w = policy.image_width;
  const bool is_image = h > 0 && w > 0;
  if (is_image && h * w != row.size()) {
    throw std::invalid_argument("augment: row size " + std::to_string(row.size()) +
                                " does not match image " + std::to_string(h) + "x" +
                                std::to_string(w));
  }

  if (is_image && policy.random_crop) {
    const std::size_t pad = policy.crop_pad;
    const std::size_t oy = static_cast<std::size_t>(rng.below(2 * pad + 1));
    const std::size_t ox = static_cast<std::size_t>(rng.below(2 * pad + 1));
    std::vector<double> cropped(h * w, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
      // source coordinates in the zero-padded image
      const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + oy) - static_cast<std::ptrdiff_t>(pad);
      if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
      for (std::size_t x = 0; x < w; ++x) {
        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + ox) - static_cast<std::ptrdiff_t>(pad);
        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
        cropped[y * w + x] = out[static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)];
      }
    }
    out = std::move(cropped);
  }

  if (is_image && policy.flip_prob > 0.0 && rng.uniform() < policy.flip_prob) {
    for (std::size_t y = 0; y < h; ++y) {
      std::reverse(out.begin() + static_cast<std::ptrdiff_t>(y * w),
                   out.begin() + static_cast<std::ptrdiff_t>((y + 1) * w));
    }
  }

  if (policy.intensity_jitter > 0.0) {
    const double s = 1.0 + policy.intensity_jitter * (2.0 * rng.uniform() - 1.0);
    for (double& v : out) v *= s;
  }

  if (policy.noise_sigma > 0.0) {
    for (double& v : out) v += rng.normal(0.0, policy.noise_sigma);
  }

  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return out;
}

ViewPair make_view_pair(const AugmentationPolicy& policy, const SamplePool& pool,
                        std::span<const std::size_t> indices, const RngStream& rng) {
  ViewPair pair;
  pair.view_a = DenseMatrix(indices.size(), pool.dims());
  pair.view_b = DenseMatrix(indices.size(), pool.dims());
  pair.source_indices.assign(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto row = pool.features.row(indices[i]);
    RngStream rng_a = rng.split(indices[i] * 2);
    RngStream rng_b = rng.split(indices[i] * 2 + 1);
    const std::vector<double> a = augment_row(policy, row, rng_a);
    const std::vector<double> b = augment_row(policy, row, rng_b);
    std::copy(a.begin(), a.end(), pair.view_a.row(i).begin());
    std::copy(b.begin(), b.end(), pair.view_b.row(i).begin());
  }
  return pair;
}

}  // namespace albench
