#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace kgran {

/// Counter-based generator: the i-th draw is splitmix64(seed + i * golden).
/// Output depends only on (seed, counter), so streams are identical on every
/// platform and a state can be saved and resumed by copying two integers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Independent stream derived from this one's seed and a tag.
  Rng split(std::uint64_t tag) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a, used to derive per-word seeds.
std::uint64_t hash_string(std::string_view text);

}  // namespace kgran
