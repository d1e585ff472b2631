#include "gibrat/diffusion.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // include the e^{-s^2} factor
};

// Golub-Welsch for the Hermite weight: the nodes are eigenvalues of the
// symmetric tridiagonal matrix with zero diagonal and subdiagonal sqrt(j/2);
// each weight is sqrt(pi) times the squared first eigenvector component.
const GaussHermiteRule& gauss_hermite(int q) {
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(q - 1);
  for (int j = 1; j < q; ++j) sub[j - 1] = std::sqrt(0.5 * j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub);
  if (solver.info() != Eigen::Success)
    throw NumericError("gauss-hermite: eigensolver failed");

  GaussHermiteRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  const double sqrt_pi = std::sqrt(kPi);
  for (int i = 0; i < q; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return cache.emplace(q, std::move(rule)).first->second;
}

// One pass of the multiplicative convolution at fixed quadrature order: in
// s-coordinates u(x) = (1/sqrt(pi)) sum w_i A_i u0(x A_i), A_i = e^{t - 2
// sqrt(t) s_i} (the Gaussian kernel of mean -t, variance 2t, reversed).
std::vector<double> convolve_at_order(const GridDensity& u0, double t,
                                      const LogGrid& x_grid, int q) {
  const GaussHermiteRule& rule = gauss_hermite(q);
  const double two_rt = 2.0 * std::sqrt(t);
  std::vector<double> amp(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    amp[i] = std::exp(t - two_rt * rule.nodes[i]);

  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  std::vector<double> out(x_grid.n);
  for (std::size_t j = 0; j < x_grid.n; ++j) {
    const double x = x_grid.x(j);
    CompensatedSum acc;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      // Underflowed weights pair with amplitudes that may have overflowed;
      // skip before multiplying so no inf * 0 forms.
      if (rule.weights[i] == 0.0) continue;
      acc.add(rule.weights[i] * amp[i] * u0.value_at(x * amp[i]));
    }
    out[j] = std::max(0.0, acc.value() * inv_sqrt_pi);
  }
  return out;
}

}  // namespace

LognormalSource::LognormalSource(double t_, double m_) : t(t_), m(m_) {
  if (!(t > 0.0))
    throw DomainError("lognormal source: need t > 0 (the t = 0 limit is a "
                      "point mass; use point-mass initial data instead)");
  if (!(m > 0.0) || !std::isfinite(m))
    throw DomainError("lognormal source: mean scale must be positive");
}

double LognormalSource::density(double x) const {
  if (!(x > 0.0)) throw DomainError("lognormal source: need x > 0");
  const double ly = std::log(x) - std::log(m);
  const double z = ly + t;
  const double log_val = -std::log(m) - ly - 0.5 * std::log(4.0 * kPi * t) -
                         z * z / (4.0 * t);
  return std::exp(log_val);
}

double LognormalSource::moment(int n) const {
  if (n < 0) throw DomainError("lognormal source: moment order must be >= 0");
  const double dn = static_cast<double>(n);
  return std::pow(m, dn) * std::exp(dn * (dn - 1.0) * t);
}

double source_density(const LognormalSource& s, double x) {
  return s.density(x);
}

GridDensity solve(const GridDensity& u0, double t, const LogGrid& x_grid,
                  const SolveOptions& opts) {
  if (!(t > 0.0)) throw DomainError("diffusion solve: need t > 0");
  if (opts.q_start < 2 || opts.q_max < opts.q_start)
    throw DomainError("diffusion solve: bad quadrature order range");
  if (!(opts.tol > 0.0))
    throw DomainError("diffusion solve: tolerance must be positive");

  std::vector<double> coarse = convolve_at_order(u0, t, x_grid, opts.q_start);
  for (int q = 2 * opts.q_start; q <= opts.q_max; q *= 2) {
    std::vector<double> fine = convolve_at_order(u0, t, x_grid, q);
    double err = 0.0;
    for (std::size_t j = 0; j < x_grid.n; ++j)
      err = std::max(err, x_grid.x(j) * std::abs(fine[j] - coarse[j]));
    if (err <= opts.tol)
      return GridDensity(x_grid, std::move(fine), u0.atom_at_zero());
    coarse = std::move(fine);
  }
  std::ostringstream msg;
  msg << "diffusion solve: quadrature did not settle by order " << opts.q_max
      << " (t = " << t << "); successive orders still differ beyond "
      << opts.tol;
  throw NumericError(msg.str());
}

GridDensity solve(const GridDensity& u0, double t, const SolveOptions& opts) {
  return solve(u0, t, u0.grid(), opts);
}

HeatFrame to_heat_frame(const GridDensity& u, double t) {
  HeatFrame out;
  out.t = t;
  const LogGrid& grid = u.grid();
  out.y.resize(grid.n);
  out.values.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    out.y[i] = grid.y(i) - t;
    out.values[i] = x * x * u.values()[i];
  }
  return out;
}

namespace {

// Log-log tail slope of |integrand| over the grid's last decade; a slope of
// -1 or shallower means the integral cannot converge.
bool tail_divergent(const LogGrid& grid,
                    const std::vector<double>& integrand) {
  const double x_lo = grid.x_max / 10.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    if (x < x_lo) continue;
    const double v = std::abs(integrand[i]);
    if (!(v > 0.0)) continue;
    const double lx = std::log(x);
    const double lv = std::log(v);
    sx += lx;
    sy += lv;
    sxx += lx * lx;
    sxy += lx * lv;
    ++count;
  }
  if (count < 2) return false;  // nothing in the tail: compact support
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return false;
  const double slope = (count * sxy - sx * sy) / denom;
  return slope >= -1.0;
}

}  // namespace

InitialConditionReport check_initial_conditions(const GridDensity& u0) {
  const LogGrid& grid = u0.grid();
  std::vector<double> ig1(grid.n);
  std::vector<double> ig2(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    const double u = u0.values()[i];
    const double lx = std::log(x);
    ig1[i] = x * lx * lx * u;
    ig2[i] = u > 0.0 ? x * u * std::log(u) : 0.0;
  }

  InitialConditionReport report;
  report.log_second_moment =
      u0.integrate([](double x, double u) {
        const double lx = std::log(x);
        return x * lx * lx * u;
      });
  report.weighted_entropy = u0.integrate([](double x, double u) {
    return u > 0.0 ? x * u * std::log(u) : 0.0;
  });
  report.log_second_moment_divergent = tail_divergent(grid, ig1);
  report.entropy_divergent = tail_divergent(grid, ig2);
  report.admissible =
      !report.log_second_moment_divergent && !report.entropy_divergent;
  return report;
}

LognormalSource matched_source(const GridDensity& u, double t) {
  const double mean = u.mean();
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw DomainError("matched source: solution mean must be positive");
  return LognormalSource(t, mean);
}

double weighted_l1_distance(const GridDensity& u, const LognormalSource& s) {
  const double on_grid = u.integrate([&s](double x, double uval) {
    return x * std::abs(uval - s.density(x));
  });

  // Beyond the grid u vanishes, so |u - s| integrates to the source's
  // size-biased tail mass there: the size-biased law of the source is
  // lognormal with log-mean log m + t and the same log-variance 2t.
  const LogGrid& grid = u.grid();
  const double mu = std::log(s.m) + s.t;
  const double sd = std::sqrt(2.0 * s.t);
  const double z_lo = (std::log(grid.x_min) - mu) / sd;
  const double z_hi = (std::log(grid.x_max) - mu) / sd;
  const double tail = 0.5 * (std::erfc(-z_lo / std::sqrt(2.0)) +
                             std::erfc(z_hi / std::sqrt(2.0)));
  return on_grid + s.m * tail;
}

RateFit convergence_rate_fit(
    const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 3)
    throw DomainError("rate fit: need at least three points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [t, d] : series) {
    if (!(d > 0.0))
      throw DomainError("rate fit: distances must be positive");
    if (!(1.0 + 2.0 * t > 0.0))
      throw DomainError("rate fit: need 1 + 2t > 0");
    const double x = std::log(1.0 + 2.0 * t);
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(series.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DomainError("rate fit: times are all equal");

  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [t, d] : series) {
    const double x = std::log(1.0 + 2.0 * t);
    const double r = std::log(d) - (fit.intercept + fit.slope * x);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

}  // namespace gibrat
