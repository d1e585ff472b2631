#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "gibrat/cf_grid.hpp"
#include "gibrat/effects.hpp"

namespace gibrat {

// Initial characteristic function.  Point masses are tagged so the series
// evaluator can use a direct complex-exponential fast path; any other CF is
// supplied as a callable.
struct InitialCf {
  std::function<std::complex<double>(double)> eval;
  std::optional<double> dirac_at;  // set when this is exp(-i xi x0)

  std::complex<double> operator()(double xi) const { return eval(xi); }

  static InitialCf dirac(double x0);
  static InitialCf custom(std::function<std::complex<double>(double)> fn);
};

// Poisson truncation record for the interaction-count series at unit
// frequency (time pre-scaled by the caller).
struct WildTruncation {
  double tau = 0.0;
  long k_max = 0;
  double tail_mass = 0.0;  // 1 - exp(-tau) * sum_{k<=k_max} tau^k / k!
};

// Smallest k_max whose Poisson(tau) upper tail is <= tol, never below
// ceil(tau).  Tail masses come from the regularized incomplete gamma, so
// they stay accurate when tiny and need no factorials.
WildTruncation poisson_truncation(double tau, double tol);

// k-th series coefficient at one frequency: the initial CF averaged over all
// products of k-1 independent multiplicative updates.  Two-atom effects use
// the closed binomial form (O(k)); wider supports enumerate the multinomial
// product tree with log-space weights.
std::complex<double> wild_coefficient_cf(const InitialCf& f0,
                                         const EffectDistribution& d, long k,
                                         double xi);

struct WildOptions {
  // Poisson tail tolerance; the default sits below the 1e-12 CF-invariant
  // budget so default outputs pass CharacteristicFunctionGrid::validate.
  double tol = 1e-13;
  long k_cap = 1'000'000;  // resource cap on the truncation index
};

struct WildResult {
  CharacteristicFunctionGrid cf;
  WildTruncation truncation;
};

// Truncated interaction series: exp(-tau) sum_k tau^k/k! coeff_{k+1}(xi) on
// the whole grid.  Stage weight tables are frequency-independent and shared
// across grid points; terms below 1e-22 absolute weight are dropped (total
// discarded mass < 1e-15 on top of the reported Poisson tail).
WildResult wild_cf(const InitialCf& f0, const EffectDistribution& d,
                   double tau, std::vector<double> xi_grid,
                   const WildOptions& opts = {});

// Series approximation of the lognormal CF: symmetric two-point effect of
// scale eps run to effective time t/eps from a unit point mass.
WildResult lognormal_cf_approx(double t, double eps,
                               std::vector<double> xi_grid,
                               const WildOptions& opts = {});

}  // namespace gibrat
