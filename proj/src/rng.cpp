#include "gibrat/rng.hpp"

#include <cmath>

#include "gibrat/errors.hpp"

namespace gibrat {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

long Rng::poisson(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw DomainError("poisson: mean must be finite and >= 0");
  if (mu == 0.0) return 0;
  // Knuth's method on log scale: count uniforms until the running sum of
  // exponentials exceeds mu.  Chunking keeps each partial product well away
  // from underflow; the draw stays exact for any mu.
  long k = 0;
  double remaining = mu;
  while (true) {
    const double chunk = remaining > 500.0 ? 500.0 : remaining;
    const double limit = std::exp(-chunk);
    double prod = 1.0;
    while (true) {
      prod *= uniform();
      if (prod <= limit) break;
      ++k;
    }
    // Each chunk contributes an independent Poisson(chunk) count; the
    // counts add up to Poisson(mu).
    remaining -= chunk;
    if (remaining <= 0.0) break;
  }
  return k;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t generation,
                       std::uint64_t index) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  state = h ^ (generation * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull);
  h = splitmix64(state);
  state = h ^ (index * 0x9e3779b97f4a7c15ull + 1ull);
  return splitmix64(state);
}

}  // namespace gibrat
