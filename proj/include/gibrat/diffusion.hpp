#pragma once

#include <utility>
#include <vector>

#include "gibrat/grid_density.hpp"

namespace gibrat {

// Diffusion limit of the kinetic model: d/dt u = d^2/dx^2 (x^2 u) on x > 0.
// The source-type solution is lognormal; general solutions are multiplicative
// convolutions of the initial datum with that source.

// Lognormal source of diffusion age t and mean scale m: density
//   (1/m) * (1 / (sqrt(4 pi t) y)) * exp(-(log y + t)^2 / (4t)),  y = x/m.
// Mass 1, mean m, variance m^2 (e^{2t} - 1), n-th moment m^n e^{n(n-1)t}.
struct LognormalSource {
  double t = 1.0;
  double m = 1.0;

  LognormalSource(double t_, double m_ = 1.0);

  // Pointwise density; evaluated in the log domain so extreme x underflow
  // to 0 instead of producing NaN.  Requires x > 0.
  double density(double x) const;

  // <x^n> in closed form.
  double moment(int n) const;
};

// Convenience free function matching the member for generic callers.
double source_density(const LognormalSource& s, double x);

struct SolveOptions {
  int q_start = 64;       // initial quadrature order (power of two)
  int q_max = 2048;       // doubling stops here
  // Settle target for sup_i x_i |u_Q - u_{2Q}|.  The default sits above the
  // noise floor of cubic log-interpolation on a ~2000-point grid (~2e-9 for
  // data whose log-density is not piecewise quadratic); asking for more than
  // the representation can deliver makes the doubling loop fail spuriously.
  double tol = 1e-8;
};

// Evolves u0 by time t > 0: u(x, t) = integral (1/z) u0(x/z) L_t(z) dz.
// In y = log z the kernel is a Gaussian of mean -t and variance 2t, so the
// integral is computed with Gauss-Hermite nodes of order Q, doubling Q until
// two successive answers agree to opts.tol (else NumericError with both
// iterates).  Off-grid u0 values are taken as 0.  Mass and mean of the
// output match u0's.
GridDensity solve(const GridDensity& u0, double t, const LogGrid& x_grid,
                  const SolveOptions& opts = {});
GridDensity solve(const GridDensity& u0, double t,
                  const SolveOptions& opts = {});

// Change of frame y = log x - t, v(y) = x^2 u(x): if u solves the x-space
// equation then v solves the plain heat equation dv/dt = d^2 v/dy^2.
struct HeatFrame {
  std::vector<double> y;
  std::vector<double> values;
  double t = 0.0;
};
HeatFrame to_heat_frame(const GridDensity& u, double t);

// Finiteness checks on the initial datum: integral of x (log x)^2 u0 and of
// x u0 log u0.  Each integral is flagged divergent when the integrand's
// log-log tail slope over the grid's last decade is >= -1 (a documented
// heuristic, not a proof); admissible = neither flagged.  Never throws.
struct InitialConditionReport {
  double log_second_moment = 0.0;
  double weighted_entropy = 0.0;
  bool log_second_moment_divergent = false;
  bool entropy_divergent = false;
  bool admissible = false;
};
InitialConditionReport check_initial_conditions(const GridDensity& u0);

// The lognormal source a solution should approach: age t, mean matched to u.
// Requires mean(u) > 0.
LognormalSource matched_source(const GridDensity& u, double t);

// integral z |u(z) - s(z)| dz.  The grid must cover u's support; source mass
// outside the grid (where |u - s| = s) is added in closed form so large-t
// sources are not truncated.
double weighted_l1_distance(const GridDensity& u, const LognormalSource& s);

// Least-squares fit of log(distance) against log(1 + 2t).  Requires >= 3
// points and positive distances.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of fit residuals in log space
};
RateFit convergence_rate_fit(
    const std::vector<std::pair<double, double>>& series);

}  // namespace gibrat
