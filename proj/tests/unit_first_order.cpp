#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "gibrat/errors.hpp"
#include "gibrat/first_order.hpp"
#include "gibrat/grid_density.hpp"
#include "gibrat/oracles.hpp"
#include "gibrat/wild_series.hpp"

using gibrat::brute_moment;
using gibrat::cf_solution;
using gibrat::cf_solution_grid;
using gibrat::density_solution;
using gibrat::DomainError;
using gibrat::GridDensity;
using gibrat::InitialCf;
using gibrat::LogGrid;
using gibrat::moment_law;
using gibrat::rescaled_limit_check;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double lognormal_pdf(double x, double mu, double s2) {
  const double d = std::log(x) - mu;
  return std::exp(-d * d / (2.0 * s2)) / (x * std::sqrt(2.0 * kPi * s2));
}

// Smooth initial characteristic function: normal with mean 1, variance 1/2.
std::complex<double> smooth_cf(double xi) {
  const double mod = std::exp(-xi * xi / 4.0);
  return {mod * std::cos(xi), -mod * std::sin(xi)};
}

// Finite-difference residual of the transport identity
//   dg/dt = (1 - g) + xi dg/dxi
// satisfied by the closed-form evolution; pure truncation error since the
// closed form is exact.
double transport_residual(double xi, double t, double delta) {
  const auto f0 = [](double xi_) { return smooth_cf(xi_); };
  const auto g = [&](double xi_, double t_) {
    return cf_solution(f0, t_, xi_);
  };
  const double dxi = delta * std::abs(xi);
  const std::complex<double> dt_term =
      (g(xi, t + delta) - g(xi, t - delta)) / (2.0 * delta);
  const std::complex<double> dxi_term =
      (g(xi + dxi, t) - g(xi - dxi, t)) / (2.0 * dxi);
  const std::complex<double> r =
      dt_term - (1.0 - g(xi, t)) - xi * dxi_term;
  return std::abs(r);
}

}  // namespace

TEST_SUITE("first_order") {

TEST_CASE("closed-form evolution fixes time zero and the origin") {
  const auto f0 = [](double xi) { return smooth_cf(xi); };
  for (double xi : {-3.0, 0.4, 8.0})
    CHECK(std::abs(cf_solution(f0, 0.0, xi) - smooth_cf(xi)) == 0.0);
  for (double t : {0.0, 0.5, 4.0})
    CHECK(cf_solution(f0, t, 0.0) == std::complex<double>(1.0));
  CHECK_THROWS_AS((void)cf_solution(f0, -0.1, 1.0), DomainError);
}

TEST_CASE("long-time limit is total collapse to the origin") {
  const auto f0 = [](double xi) { return smooth_cf(xi); };
  for (double xi : {0.5, 2.0, 20.0})
    CHECK(std::abs(cf_solution(f0, 30.0, xi) - 1.0) < 1e-12);
}

TEST_CASE("closed form satisfies its transport identity at second order") {
  for (double xi : {0.7, 2.0}) {
    for (double t : {0.4, 1.1}) {
      const double coarse = transport_residual(xi, t, 0.05);
      const double fine = transport_residual(xi, t, 0.025);
      REQUIRE(fine > 1e-12);  // genuinely resolving truncation error
      const double ratio = coarse / fine;
      CHECK(ratio > 3.0);
      CHECK(ratio < 5.0);
    }
  }
}

TEST_CASE("grid evolution matches pointwise evolution") {
  const auto f0 = [](double xi) { return smooth_cf(xi); };
  const std::vector<double> grid = {-2.0, -0.5, 0.0, 0.5, 2.0};
  const auto g = cf_solution_grid(f0, 0.8, grid);
  REQUIRE(g.xi.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(g.values[i] == cf_solution(f0, 0.8, grid[i]));
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("density transport splits mass between atom and dilated bulk") {
  const LogGrid grid(1e-8, 1e8, 1024);
  const double mu0 = -0.3, s2 = 0.5;
  const auto g0 = GridDensity::from_function(
      grid, [&](double x) { return lognormal_pdf(x, mu0, s2); });
  const double m0 = g0.mean();

  for (double t : {0.1, 1.0, 3.0}) {
    const auto gt = density_solution(g0, t);
    // Atom exactly 1 - e^{-t} (expm1 form), total mass 1, mean conserved.
    CHECK(std::abs(gt.atom_at_zero() - (-std::expm1(-t))) < 1e-15);
    CHECK(gt.mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(gt.mean() == doctest::Approx(m0).epsilon(1e-10));
    // Bulk mass shrinks as e^{-t} while the surviving mean dilates as e^t.
    const double bulk = gt.moment(0) - gt.atom_at_zero();
    CHECK(bulk == doctest::Approx(std::exp(-t)).epsilon(1e-10));
    CHECK(gt.mean() / bulk ==
          doctest::Approx(m0 * std::exp(t)).epsilon(1e-10));
    // Dilation in closed form: the bulk is e^{-2t} g0(x e^{-t}), another
    // lognormal, reproduced exactly by the log-domain interpolation.
    const double m2_expect = g0.moment(2) * std::exp(t);
    CHECK(gt.moment(2) == doctest::Approx(m2_expect).epsilon(1e-8));
    const double m3_quad = brute_moment(
        [&](double x) { return gt.value_at(x); }, 3);
    CHECK(m3_quad ==
          doctest::Approx(g0.moment(3) * std::exp(2.0 * t)).epsilon(1e-7));
  }

  CHECK((density_solution(g0, 0.0).values() == g0.values()));
  const auto with_atom = GridDensity(
      grid, g0.values(), 0.1);
  CHECK_THROWS_AS((void)density_solution(with_atom, 1.0), DomainError);
  CHECK_THROWS_AS((void)density_solution(g0, -1.0), DomainError);
}

TEST_CASE("moment evolution law") {
  CHECK(moment_law(1.0, 0, 5.0) == 1.0);
  CHECK(moment_law(2.0, 1, 3.0) == 2.0);
  CHECK(moment_law(1.5, 2, 2.0) ==
        doctest::Approx(1.5 * std::exp(2.0)).epsilon(1e-15));
  CHECK(moment_law(1.0, 3, 1.0) ==
        doctest::Approx(std::exp(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS((void)moment_law(1.0, -1, 1.0), DomainError);
  CHECK_THROWS_AS((void)moment_law(1.0, 2, -1.0), DomainError);
}

TEST_CASE("frequency and density routes agree on the evolved law") {
  // Characteristic function of the transported density (atom + bulk via
  // log-grid trapezoid) against the closed frequency-domain form, both
  // starting from the same lognormal.
  const LogGrid grid(1e-8, 1e8, 2048);
  const double mu0 = -0.25, s2 = 0.5;
  const auto g0 = GridDensity::from_function(
      grid, [&](double x) { return lognormal_pdf(x, mu0, s2); });
  const double t = 0.7;
  const auto gt = density_solution(g0, t);

  const auto f0_hat = [&](double xi) {
    // Exact lognormal characteristic function is not elementary; integrate
    // the initial grid density directly (trapezoid in log x).
    const std::complex<double> v = std::complex<double>(
        g0.integrate([&](double x, double u) { return std::cos(xi * x) * u; }),
        g0.integrate([&](double x, double u) { return -std::sin(xi * x) * u; }));
    return v;
  };

  for (double xi : {0.3, 1.0, 2.0}) {
    const auto via_cf = cf_solution(f0_hat, t, xi);
    const std::complex<double> via_density =
        std::complex<double>(gt.atom_at_zero(), 0.0) +
        std::complex<double>(
            gt.integrate([&](double x, double u) { return std::cos(xi * x) * u; }),
            gt.integrate([&](double x, double u) { return -std::sin(xi * x) * u; }));
    CHECK(std::abs(via_cf - via_density) < 1e-8);
  }
}

TEST_CASE("pre-limit jump model converges to the closed form") {
  const auto f0 = InitialCf::dirac(1.0);
  std::vector<double> grid;
  for (int i = -8; i <= 8; ++i) grid.push_back(0.5 * i);
  const auto report = rescaled_limit_check(f0, grid, 1.0);
  REQUIRE(report.epsilons.size() == 3);
  REQUIRE(report.sup_errors.size() == 3);
  CHECK(report.monotone);
  CHECK(report.sup_errors[1] < report.sup_errors[0]);
  CHECK(report.sup_errors[2] < report.sup_errors[1]);
  CHECK(report.sup_errors[2] < 0.5 * report.sup_errors[0]);
}

}  // TEST_SUITE
