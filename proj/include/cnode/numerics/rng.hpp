#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>

namespace cnode {

/**
 * @brief Counter-based 64-bit generator.
 *
 * Output i is a fixed bijective mix of (seed + (i + 1) * golden_gamma), so the
 * stream depends only on the seed and the draw index and is identical on every
 * platform. Independent streams are derived with split(), which lets restart r
 * of a sweep be reproduced without replaying restarts 0..r-1.
 */
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_{seed} {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return mix(seed_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("rng uniform: require lo < hi");
    const double v = lo + (hi - lo) * uniform01();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent child stream; does not advance this generator.
  SeededRng split(std::uint64_t stream) const noexcept {
    return SeededRng(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Matrix with i.i.d. entries uniform on [lo, hi), filled in row-major order.
inline Matrix rng_uniform(SeededRng& rng, double lo, double hi, std::size_t rows,
                          std::size_t cols) {
  if (!(lo < hi)) throw ArgumentError("rng_uniform: require lo < hi");
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace cnode
