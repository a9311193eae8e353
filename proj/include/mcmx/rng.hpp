#pragma once

#include <cstdint>
#include <initializer_list>

namespace mcmx {

// SplitMix64: a counter-based generator (output_i is a pure function of
// seed + i * golden_gamma), so independent streams never share mutable
// state and results are reproducible under any parallel schedule.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

// Mixes a master seed with stream coordinates (sweep point, trial index,
// ensemble member, ...) into a stream seed. Every coordinate passes through
// the SplitMix64 finalizer so that adjacent indices land far apart.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = master ^ 0xD6E8FEB86659FD93ull;
  for (std::uint64_t p : parts) {
    std::uint64_t z = p + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    h ^= z ^ (z >> 31);
  }
  return h;
}

}  // namespace mcmx
