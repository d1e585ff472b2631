#pragma once

#include <cstdint>

namespace gibrat {

// xoshiro256** (Blackman & Vigna, public domain reference implementation),
// seeded through SplitMix64 so any 64-bit key gives a well-mixed state.
//
// Simulation code derives one independent stream per (seed, generation,
// particle) triple, so results do not depend on evaluation order and repeated
// evolve calls never reuse a stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller (consumes two uniforms per pair; the
  // spare is cached).
  double normal();

  // Exact Poisson(mu) sample by Knuth's product method, run in chunks of
  // exponent 500 so it cannot underflow for large mu.  Cost is O(mu).
  long poisson(double mu);

 private:
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Stable mixing of a user seed with stream coordinates.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t generation,
                       std::uint64_t index);

inline Rng particle_stream(std::uint64_t seed, std::uint64_t generation,
                           std::uint64_t index) {
  return Rng(mix_seed(seed, generation, index));
}

}  // namespace gibrat
