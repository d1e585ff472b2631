#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "gibrat/errors.hpp"
#include "gibrat/rng.hpp"

using gibrat::mix_seed;
using gibrat::Rng;

TEST_SUITE("rng") {

TEST_CASE("generator output matches the reference algorithm") {
  // First words of the xoshiro256** stream seeded through SplitMix64 from
  // 42, computed with an independent implementation of the published
  // algorithm (integer arithmetic only, no shared code).
  Rng rng(42);
  CHECK(rng.next_u64() == 1546998764402558742ull);
  CHECK(rng.next_u64() == 6990951692964543102ull);
  CHECK(rng.next_u64() == 12544586762248559009ull);
  CHECK(rng.next_u64() == 17057574109182124193ull);
}

TEST_CASE("uniform doubles match the reference 53-bit construction") {
  Rng rng(123);
  CHECK(rng.uniform() == doctest::Approx(0.19669435215621578).epsilon(1e-16));
  CHECK(rng.uniform() == doctest::Approx(0.9695722925002218).epsilon(1e-16));
  CHECK(rng.uniform() == doctest::Approx(0.46744032361670884).epsilon(1e-16));
}

TEST_CASE("seed mixing matches the reference and separates coordinates") {
  CHECK(mix_seed(7, 3, 11) == 17335993426941214766ull);
  CHECK(mix_seed(7, 3, 12) == 12825115360039332951ull);
  CHECK(mix_seed(7, 4, 11) == 2555363207079656246ull);
  CHECK(mix_seed(0, 0, 0) == 16148902622497665349ull);

  // No collisions over a small grid of (generation, index) pairs.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t g = 0; g < 16; ++g)
    for (std::uint64_t i = 0; i < 16; ++i)
      seen.push_back(mix_seed(99, g, i));
  for (std::size_t a = 0; a < seen.size(); ++a)
    for (std::size_t b = a + 1; b < seen.size(); ++b)
      CHECK(seen[a] != seen[b]);
}

TEST_CASE("same seed reproduces the identical stream") {
  Rng a(777), b(777);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform sample moments sit within four standard errors") {
  Rng rng(5150);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double m2 = sum2 / n;
  // Var(U) = 1/12, Var(U^2) = 1/5 - 1/9 = 4/45.
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(m2 - 1.0 / 3.0) < 4.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("normal sample moments sit within four standard errors") {
  Rng rng(8086);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  // Var(Z^2) = 2, Var(Z^3) = 15.
  CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum3 / n) < 4.0 * std::sqrt(15.0 / n));
}

TEST_CASE("poisson counts follow the target law (chi-square, mu = 3)") {
  Rng rng(31337);
  const int n = 100000;
  const double mu = 3.0;
  // Expected cell probabilities for k = 0..11, remainder pooled.
  std::vector<double> p;
  double pk = std::exp(-mu);
  double cum = 0.0;
  for (int k = 0; k <= 11; ++k) {
    p.push_back(pk);
    cum += pk;
    pk *= mu / (k + 1);
  }
  p.push_back(1.0 - cum);

  std::vector<long> counts(p.size(), 0);
  for (int i = 0; i < n; ++i) {
    long k = rng.poisson(mu);
    CHECK(k >= 0);
    ++counts[static_cast<std::size_t>(k) < p.size() - 1 ? k : p.size() - 1];
  }
  double chi2 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double expect = n * p[k];
    chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
  }
  // 12 degrees of freedom; 0.999 quantile is 32.9.
  CHECK(chi2 < 32.9);
}

TEST_CASE("poisson chunked path keeps the mean and variance at large mu") {
  Rng rng(424242);
  const int n = 20000;
  const double mu = 600.0;  // forces the exponent-500 chunking
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(rng.poisson(mu));
    sum += k;
    sum2 += k * k;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - mu) < 4.0 * std::sqrt(mu / n));
  // Var of the sample variance of Poisson ~ (2 mu^2 + mu) / n.
  CHECK(std::abs(var - mu) < 4.0 * std::sqrt((2.0 * mu * mu + mu) / n));
}

TEST_CASE("poisson rejects invalid means and keeps mu = 0 exact") {
  Rng rng(1);
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS((void)rng.poisson(-1.0), gibrat::DomainError);
  CHECK_THROWS_AS((void)rng.poisson(std::nan("")), gibrat::DomainError);
}

}  // TEST_SUITE
