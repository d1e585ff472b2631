#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "gibrat/cf_grid.hpp"
#include "gibrat/grid_density.hpp"
#include "gibrat/wild_series.hpp"

namespace gibrat {

// Closed-form evolution of the smallest-effects limit: each update either
// multiplies a size by (1 + eps) or wipes it to eps * x, and as eps -> 0 at
// rate 1/eps the law splits into a growing Dirac mass at zero plus a
// surviving bulk that dilates upward while the mean stays put.

using CfFunction = std::function<std::complex<double>(double)>;

// g_hat(xi, t) = 1 - e^{-t} + e^{-t} * f0_hat(xi * e^{t}).  Exact; returns 1
// at xi = 0.  Requires t >= 0.
std::complex<double> cf_solution(const CfFunction& f0_hat, double t,
                                 double xi);

CharacteristicFunctionGrid cf_solution_grid(const CfFunction& f0_hat,
                                            double t,
                                            std::vector<double> xi_grid);

// Density transport: (1 - e^{-t}) delta_0 + e^{-2t} g0(x e^{-t}).  The atom
// is carried symbolically; the bulk is re-sampled onto g0's grid by
// interpolation (1e-6 relative budget for grid-resolved data).  Total mass 1
// and mean(g0) are preserved.  Requires g0 atom-free and t >= 0.
GridDensity density_solution(const GridDensity& g0, double t);

// <x^n>_t = m_n0 * e^{(n-1)t}: mass and mean conserved, higher moments grow,
// n = 0 constant.  Requires n >= 0.
double moment_law(double m_n0, int n, double t);

// Consistency of the closed form with the pre-limit kinetic model: evolves
// the two-point effect of scale eps over time t/eps through the jump
// expansion and measures the sup CF distance to cf_solution on the grid.
// Distances must shrink monotonically as eps decreases.
struct RescaledLimitReport {
  std::vector<double> epsilons;
  std::vector<double> sup_errors;
  bool monotone = false;
};
RescaledLimitReport rescaled_limit_check(
    const InitialCf& f0, const std::vector<double>& xi_grid, double t,
    const std::vector<double>& epsilons = {0.1, 0.03, 0.01},
    const WildOptions& opts = {});

}  // namespace gibrat
