#pragma once

#include <cstdint>
#include <random>

namespace proxyvote {

/// SplitMix64 finalizer. Used to derive independent seeds from coordinates.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. Every consumer owns its stream; streams are never
/// shared across threads. Output depends only on the seed (mt19937_64 is
/// fully specified by the standard, and we do our own float conversion).
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Substream for a (point, trial) coordinate under a master seed.
  static Stream derive(std::uint64_t master, std::uint64_t point, std::uint64_t trial) {
    return Stream(mix64(mix64(master ^ mix64(point + 0x51ed270b27a4f1c3ULL)) + trial));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal draw by inversion.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace proxyvote
