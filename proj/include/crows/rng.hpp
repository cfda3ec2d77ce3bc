#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crows {

// Seed mixing and random draws used throughout the toolkit.
//
// Reproducibility across platforms and thread counts is a hard requirement,
// so every randomized routine takes an explicit 64-bit seed and all derived
// streams are computed with the stateless mixer below rather than by sharing
// a generator. std::mt19937_64 has a fully specified sequence, and the draw
// helpers here avoid std::uniform_int_distribution / std::normal_distribution,
// whose outputs are implementation-defined.

/// splitmix64 finalizer: a well-mixed 64-bit permutation.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and an index path.
/// derive_seed(s, {a, b}) != derive_seed(s, {b, a}) for a != b, and distinct
/// paths give (with overwhelming probability) distinct streams.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed,
                                               std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dull);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x9e3779b97f4a7c15ull));
  return h;
}

double norm_quantile(double p);  // stats.hpp; declared here for Rng::normal

/// Deterministic random stream: mt19937_64 plus portable draw helpers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Raw 64 uniform bits.
  std::uint64_t bits() { return gen_(); }

  /// Uniform integer in [0, bound). Rejection sampling, exactly unbiased.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % bound;
  }

  /// Uniform double in (0, 1): 53 random bits, offset half an ulp so the
  /// result is never 0 or 1 (safe as a quantile-function argument).
  double unit() {
    const std::uint64_t u = gen_() >> 11;  // 53 bits
    return (double(u) + 0.5) * 0x1p-53;
  }

  /// Standard normal via the inverse CDF. Deterministic given the seed.
  double normal() { return norm_quantile(unit()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace crows
