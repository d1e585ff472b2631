#include "gibrat/first_order.hpp"

#include <algorithm>
#include <cmath>

#include "gibrat/errors.hpp"

namespace gibrat {

std::complex<double> cf_solution(const CfFunction& f0_hat, double t,
                                 double xi) {
  if (!(t >= 0.0)) throw DomainError("cf solution: need t >= 0");
  if (xi == 0.0) return 1.0;
  const double decay = std::exp(-t);
  return (1.0 - decay) + decay * f0_hat(xi * std::exp(t));
}

CharacteristicFunctionGrid cf_solution_grid(const CfFunction& f0_hat,
                                            double t,
                                            std::vector<double> xi_grid) {
  CharacteristicFunctionGrid out;
  out.xi = std::move(xi_grid);
  out.values.reserve(out.xi.size());
  out.meta = CfProvenance::analytic;
  for (double xi : out.xi) out.values.push_back(cf_solution(f0_hat, t, xi));
  return out;
}

GridDensity density_solution(const GridDensity& g0, double t) {
  if (g0.atom_at_zero() != 0.0)
    throw DomainError("density solution: initial datum must be atom-free");
  if (!(t >= 0.0)) throw DomainError("density solution: need t >= 0");
  if (t == 0.0) return g0;

  const double shrink = std::exp(-t);
  const double bulk_scale = shrink * shrink;
  const LogGrid& grid = g0.grid();
  std::vector<double> values(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    values[i] = bulk_scale * g0.value_at(grid.x(i) * shrink);
  return GridDensity(grid, std::move(values), -std::expm1(-t));
}

double moment_law(double m_n0, int n, double t) {
  if (n < 0) throw DomainError("moment law: order must be >= 0");
  if (!(t >= 0.0)) throw DomainError("moment law: need t >= 0");
  // Order 0 counts the growing atom too, so total mass stays put; positive
  // orders see only the dilating bulk.
  if (n == 0) return m_n0;
  return m_n0 * std::exp(static_cast<double>(n - 1) * t);
}

RescaledLimitReport rescaled_limit_check(const InitialCf& f0,
                                         const std::vector<double>& xi_grid,
                                         double t,
                                         const std::vector<double>& epsilons,
                                         const WildOptions& opts) {
  if (!(t >= 0.0)) throw DomainError("rescaled limit: need t >= 0");
  if (epsilons.size() < 2)
    throw DomainError("rescaled limit: need at least two scales");

  RescaledLimitReport report;
  report.epsilons = epsilons;
  for (double eps : epsilons) {
    if (!(eps > 0.0) || !(eps < 1.0))
      throw DomainError("rescaled limit: scales must lie in (0, 1)");
    const WildResult kinetic =
        wild_cf(f0, EffectDistribution::two_point_first_order(eps), t / eps,
                xi_grid, opts);
    double sup = 0.0;
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
      const std::complex<double> limit =
          cf_solution([&f0](double xi) { return f0(xi); }, t, xi_grid[i]);
      sup = std::max(sup, std::abs(kinetic.cf.values[i] - limit));
    }
    report.sup_errors.push_back(sup);
  }
  report.monotone = true;
  for (std::size_t i = 1; i < report.sup_errors.size(); ++i)
    report.monotone =
        report.monotone && report.sup_errors[i] < report.sup_errors[i - 1];
  return report;
}

}  // namespace gibrat
