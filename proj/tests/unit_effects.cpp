#include "doctest.h"

#include <cmath>
#include <vector>

#include "gibrat/effects.hpp"
#include "gibrat/errors.hpp"
#include "gibrat/rng.hpp"

using gibrat::DomainError;
using gibrat::EffectDistribution;
using gibrat::EffectSpec;
using gibrat::Rng;

namespace {

// Direct long-double evaluation of freq * (<(1+V)^n> - 1), the definition
// the binomial-identity implementation must reproduce.
double growth_rate_direct(const EffectDistribution& d, double freq, int n) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < d.values().size(); ++i) {
    acc += static_cast<long double>(d.weights()[i]) *
           (std::pow(1.0L + static_cast<long double>(d.values()[i]), n) - 1.0L);
  }
  return static_cast<double>(static_cast<long double>(freq) * acc);
}

const std::vector<double> kAsymBasePoints = {20.0 / 9.0, -9.0 / 10.0};
const std::vector<double> kAsymBaseWeights = {81.0 / 281.0, 200.0 / 281.0};

}  // namespace

TEST_SUITE("effects") {

TEST_CASE("first-order two-point law has the documented atoms and moments") {
  const auto d = EffectDistribution::two_point_first_order(0.1);
  REQUIRE(d.values().size() == 2);
  CHECK(d.values()[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(d.values()[1] == doctest::Approx(-0.9).epsilon(1e-15));
  CHECK(d.weights()[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(d.weights()[1] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(d.moment(0) == 1.0);
  CHECK(d.moment(1) == 0.0);  // atom products cancel exactly in IEEE
  CHECK(d.moment(2) == doctest::Approx(0.09).epsilon(1e-14));

  const auto half = EffectDistribution::two_point_first_order(0.5);
  CHECK(half.moment(1) == 0.0);
  CHECK(half.moment(2) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("symmetric two-point law is centered with even moments (2 eps)^k") {
  const auto d = EffectDistribution::symmetric_two_point(0.02);
  REQUIRE(d.values().size() == 2);
  CHECK(d.values()[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.values()[1] == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(d.weights()[0] == 0.5);
  CHECK(d.weights()[1] == 0.5);
  CHECK(d.moment(1) == 0.0);
  CHECK(d.moment(3) == 0.0);  // odd moments cancel exactly
  CHECK(d.moment(2) == doctest::Approx(0.04).epsilon(1e-14));

  const auto e = EffectDistribution::symmetric_two_point(0.125);
  CHECK(e.moment(2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(e.moment(4) == doctest::Approx(0.0625).epsilon(1e-14));
}

TEST_CASE("diffusion-scaled law scales base moments by eps^{n/2}") {
  const auto d =
      EffectDistribution::scaled_bounded(kAsymBasePoints, kAsymBaseWeights,
                                         1e-3);
  const double root_eps = std::sqrt(1e-3);
  CHECK(std::abs(d.moment(1)) < 1e-15);
  for (int n = 2; n <= 4; ++n) {
    CHECK(d.moment(n) ==
          doctest::Approx(std::pow(root_eps, n) * d.base_moment(n))
              .epsilon(1e-13));
  }
  // The base law was picked to have second moment exactly 2 and a positive
  // third moment; pin both.
  CHECK(d.base_moment(2) == doctest::Approx(2.0).epsilon(1e-15));
  const double x3 = (81.0 / 281.0) * std::pow(20.0 / 9.0, 3) +
                    (200.0 / 281.0) * std::pow(-9.0 / 10.0, 3);
  CHECK(x3 > 2.6);
  CHECK(d.base_moment(3) == doctest::Approx(x3).epsilon(1e-14));

  const auto sym = EffectDistribution::scaled_bounded({1.0, -1.0}, {0.5, 0.5},
                                                      0.01);
  CHECK(sym.moment(2) == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("base moments exist only for diffusion-scaled families") {
  const auto sym = EffectDistribution::symmetric_two_point(0.1);
  CHECK(sym.base_moment(2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(sym.base_moment(3)) < 1e-14);
  CHECK(sym.base_moment(4) == doctest::Approx(4.0).epsilon(1e-13));

  const auto fo = EffectDistribution::two_point_first_order(0.1);
  CHECK_THROWS_AS((void)fo.base_moment(2), DomainError);
}

TEST_CASE("constructor preconditions are enforced") {
  CHECK_THROWS_AS(EffectDistribution::two_point_first_order(0.0), DomainError);
  CHECK_THROWS_AS(EffectDistribution::two_point_first_order(1.0), DomainError);
  CHECK_THROWS_AS(EffectDistribution::two_point_first_order(-0.1),
                  DomainError);
  CHECK_THROWS_AS(EffectDistribution::symmetric_two_point(0.5), DomainError);
  CHECK_THROWS_AS(EffectDistribution::symmetric_two_point(0.0), DomainError);

  // Non-centered base: the error must report the measured mean.
  try {
    EffectDistribution::scaled_bounded({1.0, -0.5}, {0.5, 0.5}, 0.01);
    FAIL("non-centered base accepted");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("0.25") != std::string::npos);
  }
  // Scaled support must stay above -1.
  CHECK_THROWS_AS(
      EffectDistribution::scaled_bounded({1.2, -1.2}, {0.5, 0.5}, 1.0),
      DomainError);
  // Weight validity.
  CHECK_THROWS_AS(
      EffectDistribution::scaled_bounded({1.0, -1.0}, {0.7, 0.4}, 0.01),
      DomainError);
  CHECK_THROWS_AS(
      EffectDistribution::scaled_bounded({1.0, -1.0}, {1.5, -0.5}, 0.01),
      DomainError);
  CHECK_THROWS_AS(
      EffectDistribution::scaled_bounded({1.0, -1.0, 0.0}, {0.5, 0.5}, 0.01),
      DomainError);
  CHECK_THROWS_AS(EffectDistribution::scaled_bounded({}, {}, 0.01),
                  DomainError);
}

TEST_CASE("moment growth exponents vanish exactly at orders 0 and 1") {
  for (const auto& d : {EffectDistribution::two_point_first_order(0.1),
                        EffectDistribution::symmetric_two_point(0.02),
                        EffectDistribution::scaled_bounded(
                            kAsymBasePoints, kAsymBaseWeights, 1e-2)}) {
    CHECK(d.growth_rate(1.0, 0) == 0.0);
    CHECK(d.growth_rate(1.0, 1) == 0.0);
    CHECK(d.growth_rate(7.5, 0) == 0.0);
    CHECK(d.growth_rate(7.5, 1) == 0.0);
  }
}

TEST_CASE("second-order growth exponents match the closed forms") {
  const auto fo = EffectDistribution::two_point_first_order(0.1);
  CHECK(fo.growth_rate(1.0, 2) == doctest::Approx(0.09).epsilon(1e-13));

  // Diffusion scaling: rate eps^{-1}, second moment 2 eps => exponent 2.
  const auto sym = EffectDistribution::symmetric_two_point(1e-3);
  CHECK(sym.growth_rate(1e3, 2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("binomial-identity growth rate agrees with the direct average") {
  for (const auto& d : {EffectDistribution::two_point_first_order(0.3),
                        EffectDistribution::symmetric_two_point(0.08),
                        EffectDistribution::scaled_bounded(
                            kAsymBasePoints, kAsymBaseWeights, 0.04)}) {
    for (int n = 2; n <= 8; ++n) {
      const double via_binomial = d.growth_rate(2.5, n);
      const double direct = growth_rate_direct(d, 2.5, n);
      CHECK(via_binomial ==
            doctest::Approx(direct).epsilon(1e-12).scale(std::abs(direct)));
    }
  }
}

TEST_CASE("sampling follows the inverse-CDF scan of the atom table") {
  // Uniforms from stream 123 are 0.19669..., 0.96957..., 0.46744...; for the
  // half-and-half two-point law they select +0.5, -0.5, +0.5.
  const auto d = EffectDistribution::two_point_first_order(0.5);
  Rng rng(123);
  CHECK(d.sample(rng) == 0.5);
  CHECK(d.sample(rng) == -0.5);
  CHECK(d.sample(rng) == 0.5);
}

TEST_CASE("sampling frequencies match the atom weights") {
  const auto d = EffectDistribution::two_point_first_order(0.1);
  Rng rng(2024);
  const int n = 100000;
  int downs = 0;
  for (int i = 0; i < n; ++i)
    if (d.sample(rng) < 0.0) ++downs;
  const double p_hat = static_cast<double>(downs) / n;
  const double sigma = std::sqrt(0.1 * 0.9 / n);
  CHECK(std::abs(p_hat - 0.1) < 3.0 * sigma);
}

TEST_CASE("spec round trip preserves every family") {
  const std::vector<EffectDistribution> laws = {
      EffectDistribution::two_point_first_order(0.1),
      EffectDistribution::symmetric_two_point(0.02),
      EffectDistribution::scaled_bounded(kAsymBasePoints, kAsymBaseWeights,
                                         1e-3)};
  for (const auto& d : laws) {
    const EffectSpec spec = d.describe();
    const auto back = EffectDistribution::from_spec(spec);
    CHECK(back.kind() == d.kind());
    CHECK(back.epsilon() == d.epsilon());
    REQUIRE(back.values().size() == d.values().size());
    for (std::size_t i = 0; i < d.values().size(); ++i) {
      CHECK(back.values()[i] == d.values()[i]);
      CHECK(back.weights()[i] == d.weights()[i]);
    }
  }
  EffectSpec bad;
  bad.kind = "unknown_kind";
  bad.epsilon = 0.1;
  CHECK_THROWS_AS(EffectDistribution::from_spec(bad), DomainError);
}

}  // TEST_SUITE
