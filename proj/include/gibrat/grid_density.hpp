#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gibrat {

// Geometric (uniform-in-log) grid on the positive half-line.
struct LogGrid {
  double x_min = 1e-6;
  double x_max = 1e6;
  std::size_t n = 2048;

  LogGrid() = default;
  LogGrid(double x_min_, double x_max_, std::size_t n_);

  double log_min() const { return log_min_; }
  double step() const { return step_; }  // spacing in log x
  double y(std::size_t i) const { return log_min_ + step_ * static_cast<double>(i); }
  double x(std::size_t i) const;
  std::vector<double> points() const;
  bool operator==(const LogGrid& o) const {
    return x_min == o.x_min && x_max == o.x_max && n == o.n;
  }

 private:
  double log_min_ = 0.0;
  double step_ = 0.0;
};

// Density on a log grid plus an optional Dirac atom at x = 0.  The atom is
// carried symbolically; it never contributes to positive-order moments.
//
// Off-grid evaluation interpolates log(density) against log(x) with a
// 4-point Lagrange cubic, which reproduces every lognormal exactly and stays
// positive; stencils touching a zero value fall back to linear interpolation
// in linear space.  Outside [x_min, x_max] the density evaluates to 0.
class GridDensity {
 public:
  GridDensity(LogGrid grid, std::vector<double> values, double atom_at_zero = 0.0);

  static GridDensity from_function(const LogGrid& grid,
                                   const std::function<double(double)>& density,
                                   double atom_at_zero = 0.0);

  const LogGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double atom_at_zero() const { return atom_at_zero_; }

  double value_at(double x) const;

  // Trapezoid quadrature in log coordinates of x^n * density; spectrally
  // accurate for smooth decaying integrands on these grids.
  // moment(0) includes the zero atom; higher orders do not.
  double moment(int n) const;
  double mass() const { return moment(0); }
  double mean() const { return moment(1); }

  // Same quadrature applied to an arbitrary pointwise transform g(x, u(x)).
  double integrate(const std::function<double(double, double)>& integrand) const;

  GridDensity normalized() const;

 private:
  LogGrid grid_;
  std::vector<double> values_;
  std::vector<double> log_values_;  // cached for interpolation; -inf at zeros
  double atom_at_zero_ = 0.0;
};

}  // namespace gibrat
