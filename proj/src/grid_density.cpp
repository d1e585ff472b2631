#include "gibrat/grid_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {

LogGrid::LogGrid(double x_min_, double x_max_, std::size_t n_)
    : x_min(x_min_), x_max(x_max_), n(n_) {
  if (!(x_min > 0.0) || !(x_max > x_min) || !std::isfinite(x_max))
    throw DomainError("log grid: need 0 < x_min < x_max finite");
  if (n < 4) throw DomainError("log grid: need at least 4 points");
  log_min_ = std::log(x_min);
  step_ = (std::log(x_max) - log_min_) / static_cast<double>(n - 1);
}

double LogGrid::x(std::size_t i) const { return std::exp(y(i)); }

std::vector<double> LogGrid::points() const {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
  return out;
}

GridDensity::GridDensity(LogGrid grid, std::vector<double> values,
                         double atom_at_zero)
    : grid_(grid), values_(std::move(values)), atom_at_zero_(atom_at_zero) {
  if (values_.size() != grid_.n)
    throw DomainError("grid density: value count does not match grid size");
  if (!(atom_at_zero_ >= 0.0))
    throw DomainError("grid density: atom weight must be nonnegative");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("grid density: values must be finite and nonnegative");
  }
  log_values_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i)
    log_values_[i] = values_[i] > 0.0
                         ? std::log(values_[i])
                         : -std::numeric_limits<double>::infinity();
}

GridDensity GridDensity::from_function(
    const LogGrid& grid, const std::function<double(double)>& density,
    double atom_at_zero) {
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) v[i] = density(grid.x(i));
  return GridDensity(grid, std::move(v), atom_at_zero);
}

double GridDensity::value_at(double x) const {
  if (!(x > 0.0)) return 0.0;
  const double y = std::log(x);
  const double pos = (y - grid_.log_min()) / grid_.step();
  if (pos < 0.0 || pos > static_cast<double>(grid_.n - 1)) return 0.0;

  // Exact node hits return the stored value: interpolation must reproduce
  // the data it was built from.
  const long nearest = std::lround(pos);
  if (nearest >= 0 && nearest < static_cast<long>(grid_.n) &&
      x == grid_.x(static_cast<std::size_t>(nearest)))
    return values_[static_cast<std::size_t>(nearest)];

  // Stencil i0..i0+3 centered so the target lies between the middle pair.
  const auto last = static_cast<long>(grid_.n) - 1;
  long i1 = static_cast<long>(std::floor(pos));
  if (i1 >= last) i1 = last - 1;
  long i0 = std::clamp(i1 - 1, 0L, last - 3);

  const double t = pos - static_cast<double>(i0);
  bool positive = true;
  for (long k = 0; k < 4; ++k) positive = positive && values_[i0 + k] > 0.0;

  if (positive) {
    // Lagrange cubic through (0,1,2,3) in index coordinates, on log values.
    double acc = 0.0;
    for (long k = 0; k < 4; ++k) {
      double num = 1.0;
      double den = 1.0;
      for (long j = 0; j < 4; ++j) {
        if (j == k) continue;
        num *= t - static_cast<double>(j);
        den *= static_cast<double>(k - j);
      }
      acc += log_values_[i0 + k] * (num / den);
    }
    return std::exp(acc);
  }

  // Near zeros of the density a log stencil is unusable; fall back to
  // linear interpolation between the bracketing pair.
  const double s = pos - static_cast<double>(i1);
  return values_[i1] * (1.0 - s) + values_[i1 + 1] * s;
}

double GridDensity::moment(int n) const {
  if (n < 0) throw DomainError("grid density: moment order must be >= 0");
  // In y = log x the integrand is x^{n+1} u(x); trapezoid on the uniform
  // y grid.  Evaluated via exp(n+1 logs) only through pow to avoid overflow
  // for moderate n on wide grids.
  CompensatedSum acc;
  const double h = grid_.step();
  for (std::size_t i = 0; i < grid_.n; ++i) {
    if (values_[i] == 0.0) continue;
    const double w = (i == 0 || i == grid_.n - 1) ? 0.5 : 1.0;
    const double lx = grid_.y(i);
    acc.add(w * std::exp(static_cast<double>(n + 1) * lx + log_values_[i]));
  }
  double result = acc.value() * h;
  if (n == 0) result += atom_at_zero_;
  return result;
}

double GridDensity::integrate(
    const std::function<double(double, double)>& integrand) const {
  CompensatedSum acc;
  const double h = grid_.step();
  for (std::size_t i = 0; i < grid_.n; ++i) {
    const double w = (i == 0 || i == grid_.n - 1) ? 0.5 : 1.0;
    const double x = grid_.x(i);
    acc.add(w * x * integrand(x, values_[i]));
  }
  return acc.value() * h;
}

GridDensity GridDensity::normalized() const {
  const double total = mass();
  if (!(total > 0.0))
    throw NumericError("grid density: cannot normalize zero mass");
  std::vector<double> v(values_);
  for (double& x : v) x /= total;
  return GridDensity(grid_, std::move(v), atom_at_zero_ / total);
}

}  // namespace gibrat
