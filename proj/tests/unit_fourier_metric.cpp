#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "gibrat/cf_grid.hpp"
#include "gibrat/effects.hpp"
#include "gibrat/errors.hpp"
#include "gibrat/fourier_metric.hpp"
#include "gibrat/oracles.hpp"
#include "gibrat/wild_series.hpp"

using gibrat::AppendixBoundParams;
using gibrat::appendix_bound;
using gibrat::BoundCheck;
using gibrat::CharacteristicFunctionGrid;
using gibrat::d_s;
using gibrat::DomainError;
using gibrat::EffectDistribution;
using gibrat::InitialCf;
using gibrat::lognormal_cf_quadrature;
using gibrat::MetricGridSpec;
using gibrat::verify_bound;
using gibrat::wild_cf;

namespace {

CharacteristicFunctionGrid point_mass_cf(const std::vector<double>& xi,
                                         double x0) {
  CharacteristicFunctionGrid g;
  g.xi = xi;
  for (double v : xi)
    g.values.push_back({std::cos(v * x0), -std::sin(v * x0)});
  return g;
}

CharacteristicFunctionGrid sample_cf(
    const std::vector<double>& xi,
    const std::function<std::complex<double>(double)>& fn) {
  CharacteristicFunctionGrid g;
  g.xi = xi;
  for (double v : xi) g.values.push_back(fn(v));
  return g;
}

}  // namespace

TEST_SUITE("fourier_metric") {

TEST_CASE("frequency grid construction") {
  MetricGridSpec spec;
  spec.xi_min = 1.0;
  spec.xi_max = 100.0;
  spec.points_per_decade = 2;
  spec.symmetric = false;
  const auto grid = spec.build_grid();
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(grid[2] == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(grid.back() == doctest::Approx(100.0).epsilon(1e-14));

  spec.symmetric = true;
  const auto sym = spec.build_grid();
  REQUIRE(sym.size() == 10);
  CHECK(sym.front() == doctest::Approx(-100.0).epsilon(1e-14));
  CHECK(sym[4] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(sym[5] == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(sym[i] == doctest::Approx(-sym[9 - i]).epsilon(1e-15));

  // A range that is not a whole number of decades keeps its upper edge.
  MetricGridSpec ragged;
  ragged.xi_min = 1.0;
  ragged.xi_max = 50.0;
  ragged.points_per_decade = 1;
  ragged.symmetric = false;
  const auto r = ragged.build_grid();
  REQUIRE(r.size() == 3);
  CHECK(r.back() == 50.0);

  MetricGridSpec bad;
  bad.xi_min = 0.0;
  CHECK_THROWS_AS((void)bad.build_grid(), DomainError);
  bad.xi_min = 2.0;
  bad.xi_max = 1.0;
  CHECK_THROWS_AS((void)bad.build_grid(), DomainError);
  bad.xi_max = 10.0;
  bad.points_per_decade = 0;
  CHECK_THROWS_AS((void)bad.build_grid(), DomainError);
}

TEST_CASE("metric of a law against itself is zero") {
  const std::vector<double> grid = {0.1, 0.5, 1.0, 5.0};
  const auto f = point_mass_cf(grid, 1.3);
  const auto r = d_s(f, f, 3.0);
  CHECK(r.value == 0.0);
}

TEST_CASE("metric requires one shared grid and skips zero frequency") {
  const auto f = point_mass_cf({0.5, 1.0}, 1.0);
  const auto g = point_mass_cf({0.5, 2.0}, 1.5);
  CHECK_THROWS_AS((void)d_s(f, g, 3.0), DomainError);
  CharacteristicFunctionGrid empty;
  CHECK_THROWS_AS((void)d_s(empty, empty, 3.0), DomainError);

  // With 0 on the grid the sup ignores it even though the values differ
  // most there in ratio terms.
  const std::vector<double> with_zero = {0.0, 1.0, 2.0};
  auto a = point_mass_cf(with_zero, 1.0);
  auto b = point_mass_cf(with_zero, 1.4);
  const auto r = d_s(a, b, 3.0);
  CHECK(r.argmax_xi != 0.0);
  CHECK(r.value > 0.0);
}

TEST_CASE("metric is symmetric and satisfies the triangle inequality") {
  MetricGridSpec spec;
  spec.xi_min = 0.01;
  spec.xi_max = 10.0;
  spec.points_per_decade = 8;
  const auto grid = spec.build_grid();
  const auto f = point_mass_cf(grid, 1.0);
  const auto g = point_mass_cf(grid, 1.5);
  const auto h = point_mass_cf(grid, 2.2);
  for (double s : {2.0, 3.0}) {
    CHECK(d_s(f, g, s).value == d_s(g, f, s).value);
    CHECK(d_s(f, h, s).value <=
          d_s(f, g, s).value + d_s(g, h, s).value + 1e-15);
  }
}

TEST_CASE("metric scales as c^{-s} under frequency dilation") {
  MetricGridSpec spec;
  spec.xi_min = 0.05;
  spec.xi_max = 5.0;
  spec.points_per_decade = 16;
  spec.symmetric = false;
  const auto grid = spec.build_grid();
  const double c = 4.0;
  std::vector<double> scaled_grid;
  for (double xi : grid) scaled_grid.push_back(c * xi);

  // Point masses at a and b on the base grid; at a/c and b/c on the scaled
  // grid the numerators coincide while the denominators pick up c^s.
  const auto f = point_mass_cf(grid, 1.0);
  const auto g = point_mass_cf(grid, 1.7);
  const auto fc = point_mass_cf(scaled_grid, 1.0 / c);
  const auto gc = point_mass_cf(scaled_grid, 1.7 / c);
  const double s = 3.0;
  const auto base = d_s(f, g, s);
  const auto scaled = d_s(fc, gc, s);
  CHECK(scaled.value ==
        doctest::Approx(base.value / std::pow(c, s)).epsilon(1e-12));
}

TEST_CASE("grid refinement never lowers the measured sup") {
  const auto eval_on = [&](int ppd) {
    MetricGridSpec spec;
    spec.xi_min = 0.01;
    spec.xi_max = 10.0;
    spec.points_per_decade = ppd;
    const auto grid = spec.build_grid();
    const auto f = point_mass_cf(grid, 1.0);
    const auto g = sample_cf(grid, [](double xi) {
      const double mod = std::exp(-xi * xi / 8.0);
      return std::complex<double>(mod * std::cos(xi), -mod * std::sin(xi));
    });
    return d_s(f, g, 3.0).value;
  };
  // Doubling points per decade keeps every coarse point, so the sup can
  // only grow.
  const double coarse = eval_on(16);
  const double fine = eval_on(32);
  CHECK(fine >= coarse);
  CHECK(fine <= coarse * 1.5);  // and the refinement is already stable-ish
}

TEST_CASE("mismatched means blow up as the grid reaches lower frequency") {
  const auto eval_with_min = [&](double xi_min) {
    MetricGridSpec spec;
    spec.xi_min = xi_min;
    spec.xi_max = 10.0;
    spec.points_per_decade = 16;
    const auto grid = spec.build_grid();
    return d_s(point_mass_cf(grid, 1.0), point_mass_cf(grid, 1.1), 3.0);
  };
  const auto a = eval_with_min(1e-2);
  const auto b = eval_with_min(1e-3);
  // |f - g| ~ 0.1 xi near zero, so the ratio grows like xi^{-2}: two extra
  // decades of reach multiply the sup by ~100.
  CHECK(std::abs(b.argmax_xi) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(b.value / a.value == doctest::Approx(100.0).epsilon(0.2));
}

TEST_CASE("matched moments keep the order-3 metric finite as the grid grows") {
  const double a = 0.5;
  // Point masses at 1 +- a against the normal law with the same mean and
  // second moment: the difference opens at order xi^3, exactly the metric's
  // weight, so lower xi_min must not change the sup.
  const auto eval_with_min = [&](double xi_min) {
    MetricGridSpec spec;
    spec.xi_min = xi_min;
    spec.xi_max = 10.0;
    spec.points_per_decade = 16;
    const auto grid = spec.build_grid();
    const auto two_point = sample_cf(grid, [&](double xi) {
      return std::complex<double>(std::cos(xi) * std::cos(a * xi),
                                  -std::sin(xi) * std::cos(a * xi));
    });
    const auto normal = sample_cf(grid, [&](double xi) {
      const double mod = std::exp(-a * a * xi * xi / 2.0);
      return std::complex<double>(mod * std::cos(xi), -mod * std::sin(xi));
    });
    return d_s(two_point, normal, 3.0).value;
  };
  const double shallow = eval_with_min(1e-2);
  const double deep = eval_with_min(1e-4);
  CHECK(deep == doctest::Approx(shallow).epsilon(0.05));
}

TEST_CASE("error bound closed form") {
  AppendixBoundParams p;
  p.epsilon = 1e-3;
  p.sigma = 2.0;
  p.x3 = 0.0;
  p.m3 = 1.0;
  p.t = 0.5;

  SUBCASE("zero time gives a zero bound") {
    p.t = 0.0;
    CHECK(appendix_bound(p) == 0.0);
  }
  SUBCASE("symmetric base law reduces to the two-exponential form") {
    const double expect = std::sqrt(p.epsilon) * (p.m3 / (3.0 * p.sigma)) *
                          (std::exp(3.0 * p.sigma * p.t) - 1.0) *
                          std::exp(3.0 * p.sigma * p.t);
    CHECK(appendix_bound(p) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("bound scales exactly as sqrt(epsilon) when x3 = 0") {
    const double small = appendix_bound(p);
    p.epsilon = 4e-3;
    const double large = appendix_bound(p);
    CHECK(large / small == doctest::Approx(2.0).epsilon(1e-13));
  }
  SUBCASE("degenerate growth gap falls back to the linear-in-time factor") {
    p.x3 = 1.0;
    p.epsilon = 0.04;
    const double growth = 3.0 * p.sigma + p.x3 * std::sqrt(p.epsilon);
    p.third_moment_rate = growth;  // d = 0 exactly
    const double expect =
        std::sqrt(p.epsilon) * p.m3 * p.t * std::exp(growth * p.t);
    CHECK(appendix_bound(p) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("parameter validation") {
    p.epsilon = 0.0;
    CHECK_THROWS_AS((void)appendix_bound(p), DomainError);
    p.epsilon = 1e-3;
    p.sigma = 0.0;
    CHECK_THROWS_AS((void)appendix_bound(p), DomainError);
    p.sigma = 2.0;
    p.m3 = -1.0;
    CHECK_THROWS_AS((void)appendix_bound(p), DomainError);
    p.m3 = 1.0;
    p.t = -0.5;
    CHECK_THROWS_AS((void)appendix_bound(p), DomainError);
  }
  SUBCASE("a skew too large for the gap names the remedy") {
    p.sigma = 0.1;
    p.x3 = 10.0;
    p.epsilon = 0.01;
    try {
      (void)appendix_bound(p);
      FAIL("expected a domain error");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("smaller") != std::string::npos);
    }
  }
}

TEST_CASE("bound verification on identical laws") {
  MetricGridSpec spec;
  spec.xi_min = 0.1;
  spec.xi_max = 10.0;
  spec.points_per_decade = 4;
  const auto grid = spec.build_grid();
  const auto f = point_mass_cf(grid, 1.0);
  AppendixBoundParams p;
  p.epsilon = 1e-2;
  p.sigma = 2.0;
  p.m3 = 1.0;
  p.t = 0.5;
  const auto check = verify_bound(f, f, p, spec);
  CHECK(check.measured == 0.0);
  CHECK(check.ratio == 0.0);
  CHECK(check.satisfied);
  CHECK(check.bound == doctest::Approx(appendix_bound(p)).epsilon(1e-15));
}

TEST_CASE("bound verification on a genuine kinetic-vs-limit pair") {
  MetricGridSpec spec;
  spec.xi_min = 0.1;
  spec.xi_max = 10.0;
  spec.points_per_decade = 8;
  spec.symmetric = true;
  const auto grid = spec.build_grid();

  const double t = 0.3;
  const double eps = 0.01;
  const auto kinetic = wild_cf(InitialCf::dirac(1.0),
                               EffectDistribution::symmetric_two_point(eps),
                               t / eps, grid);
  CharacteristicFunctionGrid limit;
  limit.xi = grid;
  for (double xi : grid)
    limit.values.push_back(lognormal_cf_quadrature(t, 1.0, xi));

  AppendixBoundParams p;
  p.epsilon = eps;
  p.sigma = 2.0;  // base law is +-sqrt(2) with equal weights
  p.x3 = 0.0;
  p.m3 = 1.0;  // point mass at 1
  p.t = t;
  const auto check = verify_bound(kinetic.cf, limit, p, spec);
  CHECK(check.measured > 0.0);
  CHECK(check.satisfied);
  CHECK(check.ratio ==
        doctest::Approx(check.measured / std::sqrt(eps)).epsilon(1e-13));
  CHECK(check.measured <= check.bound);
}

}  // TEST_SUITE
