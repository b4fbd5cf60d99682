#pragma once

#include <cstdint>
#include <random>

namespace revmac {

// SplitMix64 mixing step (Vigna's constants). Used to derive independent
// substream seeds from (master seed, stream index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic uniform source. std::mt19937_64 is fully specified by the
// standard, so identical seeds give identical streams on every platform;
// the double mapping below is fixed here rather than delegated to the
// unspecified standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  static Rng substream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(master_seed ^ splitmix64(index)));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Always consumes exactly one draw, keeping streams aligned across
  // policies that mix degenerate and interior probabilities.
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace revmac
