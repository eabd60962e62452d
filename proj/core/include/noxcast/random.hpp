#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace noxcast {

/// Seedable generator whose output is identical on every platform.
///
/// Only the raw 64-bit stream of std::mt19937_64 is used; the standard
/// distributions are implementation-defined, so uniform, integer and normal
/// variates are derived here with fixed algorithms:
///   uniform()     53 high bits scaled to [0, 1)
///   below(n)      modulo with rejection of the biased low range
///   normal()      Marsaglia polar method, spare value cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  template <typename T>
  void shuffle(std::span<T> items) {
    // Fisher-Yates, back to front.
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t value) noexcept;

/// Deterministically combine a base seed with further coordinates.
std::uint64_t derive_seed(std::uint64_t base, std::span<const std::uint64_t> coordinates) noexcept;

}  // namespace noxcast
