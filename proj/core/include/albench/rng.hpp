#pragma once

#include <cstdint>
#include <vector>

namespace albench {

/// Splittable deterministic pseudorandom stream (splitmix64 core).
///
/// Every distribution here is implemented by hand so that a given seed and
/// draw sequence produce bit-identical doubles on any platform; the standard
/// library distributions make no such guarantee. split(key) derives an
/// independent child stream from the construction seed only, so substreams
/// do not depend on how many draws the parent has made.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Gaussian via Box-Muller with a cached spare.
  double normal(double mu = 0.0, double sigma = 1.0);

  /// Unbiased uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Independent child stream keyed on (seed, key).
  RngStream split(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

  /// Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// k distinct indices drawn uniformly from [0, n), returned sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, RngStream& rng);

}  // namespace albench
