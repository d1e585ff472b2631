#include "gibrat/fourier_metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gibrat/errors.hpp"

namespace gibrat {

std::vector<double> MetricGridSpec::build_grid() const {
  if (!(xi_min > 0.0) || !(xi_max > xi_min))
    throw DomainError("metric grid: need 0 < xi_min < xi_max");
  if (points_per_decade < 1)
    throw DomainError("metric grid: need at least one point per decade");

  std::vector<double> positive;
  const double step = 1.0 / static_cast<double>(points_per_decade);
  const double decades = std::log10(xi_max / xi_min);
  const long count = static_cast<long>(std::floor(decades / step + 1e-9));
  positive.reserve(count + 2);
  for (long i = 0; i <= count; ++i)
    positive.push_back(xi_min * std::pow(10.0, step * static_cast<double>(i)));
  if (positive.back() < xi_max * (1.0 - 1e-12)) positive.push_back(xi_max);

  if (!symmetric) return positive;
  std::vector<double> grid;
  grid.reserve(2 * positive.size());
  for (auto it = positive.rbegin(); it != positive.rend(); ++it)
    grid.push_back(-*it);
  grid.insert(grid.end(), positive.begin(), positive.end());
  return grid;
}

MetricResult d_s(const CharacteristicFunctionGrid& f,
                 const CharacteristicFunctionGrid& g, double s) {
  if (f.xi != g.xi)
    throw DomainError("fourier metric: the two CFs must share one grid");
  if (f.xi.empty()) throw DomainError("fourier metric: empty grid");

  MetricResult out;
  for (std::size_t i = 0; i < f.xi.size(); ++i) {
    const double xi = f.xi[i];
    if (xi == 0.0) continue;  // the sup runs over nonzero frequencies
    const double ratio =
        std::abs(f.values[i] - g.values[i]) / std::pow(std::abs(xi), s);
    if (ratio > out.value) {
      out.value = ratio;
      out.argmax_xi = xi;
    }
  }
  return out;
}

MetricResult d_s(const CharacteristicFunctionGrid& f,
                 const CharacteristicFunctionGrid& g, double s,
                 const MetricGridSpec& spec) {
  if (f.xi != spec.build_grid())
    throw DomainError("fourier metric: grid was not built from the given MetricGridSpec");
  return d_s(f, g, s);
}

namespace {

void validate_bound_params(const AppendixBoundParams& p) {
  if (!(p.epsilon > 0.0))
    throw DomainError("appendix bound: need epsilon > 0");
  if (!(p.sigma > 0.0)) throw DomainError("appendix bound: need sigma > 0");
  if (!(p.m3 >= 0.0)) throw DomainError("appendix bound: need m3 >= 0");
  if (!(p.t >= 0.0)) throw DomainError("appendix bound: need t >= 0");
  if (!(3.0 * p.sigma - p.x3 * std::sqrt(p.epsilon) > 0.0)) {
    std::ostringstream msg;
    msg << "appendix bound: 3 sigma - <X^3> sqrt(eps) = "
        << 3.0 * p.sigma - p.x3 * std::sqrt(p.epsilon)
        << " must be positive; choose a smaller epsilon";
    throw DomainError(msg.str());
  }
}

}  // namespace

double appendix_bound(const AppendixBoundParams& p) {
  validate_bound_params(p);
  const double root_eps = std::sqrt(p.epsilon);
  const double rate =
      p.third_moment_rate == 0.0 ? 6.0 * p.sigma : p.third_moment_rate;
  const double growth = 3.0 * p.sigma + p.x3 * root_eps;
  const double d = rate - growth;
  // A(t) = m3 (e^{dt} - 1) / d, continuously extended to m3 t at d = 0.
  const double a = std::abs(d * p.t) < 1e-12
                       ? p.m3 * p.t
                       : p.m3 * std::expm1(d * p.t) / d;
  return root_eps * a * std::exp(growth * p.t);
}

BoundCheck verify_bound(const CharacteristicFunctionGrid& kinetic_cf,
                        const CharacteristicFunctionGrid& diffusion_cf,
                        const AppendixBoundParams& p) {
  const MetricResult measured = d_s(kinetic_cf, diffusion_cf, 3.0);
  BoundCheck out;
  out.measured = measured.value;
  out.argmax_xi = measured.argmax_xi;
  out.bound = appendix_bound(p);
  out.ratio = measured.value / std::sqrt(p.epsilon);
  out.satisfied = out.measured <= out.bound;
  return out;
}

BoundCheck verify_bound(const CharacteristicFunctionGrid& kinetic_cf,
                        const CharacteristicFunctionGrid& diffusion_cf,
                        const AppendixBoundParams& p,
                        const MetricGridSpec& spec) {
  if (kinetic_cf.xi != spec.build_grid())
    throw DomainError("fourier metric: grid was not built from the given MetricGridSpec");
  return verify_bound(kinetic_cf, diffusion_cf, p);
}

}  // namespace gibrat
