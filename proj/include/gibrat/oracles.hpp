#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace gibrat {

// Controls the self-refining quadratures below.  Every oracle doubles its
// refinement until two successive results agree within tolerance and reports
// that final pair, so callers can audit the convergence claim.
struct QuadratureSpec {
  enum class Method { adaptive_interval, transformed_gaussian_nodes };
  Method method = Method::adaptive_interval;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_refinements = 12;
};

template <typename T>
struct Audited {
  T value{};
  T previous{};      // result one refinement level earlier
  int refinements = 0;
};

// Characteristic function of the lognormal source with mean scale m at
// diffusion time t, by quadrature in the log coordinate: a standard Gaussian
// weight times the oscillation exp(-i |xi| m e^y).  Large |xi| is handled by
// splitting the axis at the oscillation zeros, integrating each panel with
// fixed Gauss-Legendre rules, and accelerating the alternating panel series
// by repeated pairwise averaging of its partial sums.  Documented validity
// |xi| <= 1e3.
Audited<std::complex<double>> lognormal_cf_quadrature_audited(
    double t, double m, double xi, const QuadratureSpec& spec = {});
std::complex<double> lognormal_cf_quadrature(double t, double m, double xi,
                                             const QuadratureSpec& spec = {});

// Gaussian of mean 0 and variance 2t.
double heat_kernel(double t, double y);

// Adaptive quadrature of x^n * density(x) over (0, inf) via the log
// substitution, with automatic bracketing of the integrand's support.
Audited<double> brute_moment_audited(
    const std::function<double(double)>& density, int n,
    const QuadratureSpec& spec = {});
double brute_moment(const std::function<double(double)>& density, int n,
                    const QuadratureSpec& spec = {});

// Centered finite-difference residual of du/dt = d^2(x^2 u)/dx^2 for a
// solution evaluable at arbitrary (x, t).  The spatial stencil uses a local
// spacing delta*x; the time derivative uses the same delta.  If t - delta
// would be negative the time difference degrades to forward one-sided and
// the flag records it.
struct ResidualField {
  std::vector<double> residual;
  double max_norm = 0.0;
  bool one_sided_time = false;
};
ResidualField pde_residual(const std::function<double(double, double)>& u_fn,
                           const std::vector<double>& x_grid, double t,
                           double delta);

}  // namespace gibrat
