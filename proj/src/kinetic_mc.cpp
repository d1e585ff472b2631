#include "gibrat/kinetic_mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {
namespace {

// Inverse-CDF sampler for a grid density: the atom first, then the exact
// inverse of the trapezoid CDF in y = log x (piecewise quadratic, so each
// cell inverts as a stable quadratic root).
struct GridSampler {
  explicit GridSampler(const GridDensity& gd) : gd_(&gd) {
    const LogGrid& grid = gd.grid();
    const double h = grid.step();
    g_.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
      g_[i] = grid.x(i) * gd.values()[i];
    cum_.resize(grid.n);
    cum_[0] = 0.0;
    CompensatedSum acc;
    for (std::size_t i = 0; i + 1 < grid.n; ++i) {
      acc.add(0.5 * h * (g_[i] + g_[i + 1]));
      cum_[i + 1] = acc.value();
    }
    bulk_ = cum_.back();
    const double total = bulk_ + gd.atom_at_zero();
    if (!(total > 0.0))
      throw DomainError("init ensemble: initial density has zero mass");
    p_atom_ = gd.atom_at_zero() / total;
  }

  double operator()(double u) const {
    if (u < p_atom_) return 0.0;
    const double h = gd_->grid().step();
    double target = (u - p_atom_) / (1.0 - p_atom_) * bulk_;
    target = std::min(target, std::nextafter(bulk_, 0.0));
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double c = target - cum_[j];
    const double g0 = g_[j];
    const double a = (g_[j + 1] - g0) / h;
    double s;
    if (c <= 0.0) {
      s = 0.0;
    } else {
      const double disc = std::sqrt(std::max(0.0, g0 * g0 + 2.0 * a * c));
      s = 2.0 * c / (g0 + disc);
    }
    return std::exp(gd_->grid().y(j) + std::min(s, h));
  }

 private:
  const GridDensity* gd_;
  std::vector<double> g_;    // x * u(x) at the nodes: the y-space integrand
  std::vector<double> cum_;  // cumulative cell masses
  double bulk_ = 0.0;
  double p_atom_ = 0.0;
};

}  // namespace

ParticleEnsemble init_ensemble(std::size_t n, const InitialDatum& initial,
                               std::uint64_t seed, double frequency) {
  if (n < 1) throw DomainError("init ensemble: need at least one particle");
  if (!(frequency > 0.0) || !std::isfinite(frequency))
    throw DomainError("init ensemble: frequency must be positive");

  ParticleEnsemble e;
  e.sizes.resize(n);
  e.frequency = frequency;
  e.seed = seed;

  if (const auto* dirac = std::get_if<InitialDirac>(&initial)) {
    if (!(dirac->x0 >= 0.0) || !std::isfinite(dirac->x0))
      throw DomainError("init ensemble: point mass location must be >= 0");
    std::fill(e.sizes.begin(), e.sizes.end(), dirac->x0);
  } else if (const auto* ln = std::get_if<InitialLognormal>(&initial)) {
    if (!(ln->t0 > 0.0))
      throw DomainError("init ensemble: lognormal age must be positive");
    if (!(ln->mean > 0.0))
      throw DomainError("init ensemble: lognormal mean must be positive");
    const double rt = std::sqrt(2.0 * ln->t0);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = particle_stream(seed, 0, i);
      e.sizes[i] = ln->mean * std::exp(-ln->t0 + rt * rng.normal());
    }
  } else {
    const GridSampler sampler(std::get<GridDensity>(initial));
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = particle_stream(seed, 0, i);
      e.sizes[i] = sampler(rng.uniform());
    }
  }
  e.generation = 1;  // generation 0 belongs to the init draws
  return e;
}

ParticleEnsemble evolve_exact(ParticleEnsemble e, const EffectDistribution& d,
                              double dtau) {
  if (!(dtau >= 0.0) || !std::isfinite(dtau))
    throw DomainError("evolve: duration must be finite and >= 0");
  if (dtau == 0.0) return e;

  const double mu = e.frequency * dtau;
  for (std::size_t i = 0; i < e.sizes.size(); ++i) {
    Rng rng = particle_stream(e.seed, e.generation, i);
    const long k = rng.poisson(mu);
    double x = e.sizes[i];
    for (long j = 0; j < k && x != 0.0; ++j) x *= 1.0 + d.sample(rng);
    e.sizes[i] = x;
  }
  e.time += dtau;
  e.generation += 1;
  return e;
}

MomentEstimate empirical_moment(const ParticleEnsemble& e, int n) {
  if (n < 0) throw DomainError("empirical moment: order must be >= 0");
  if (n == 0) return {1.0, 0.0};
  const std::size_t count = e.sizes.size();
  if (count == 0) throw DomainError("empirical moment: empty ensemble");

  CompensatedSum sum;
  for (double x : e.sizes) sum.add(std::pow(x, n));
  const double mean = sum.value() / static_cast<double>(count);

  if (count < 2) return {mean, 0.0};
  CompensatedSum sq;
  for (double x : e.sizes) {
    const double dev = std::pow(x, n) - mean;
    sq.add(dev * dev);
  }
  const double var = sq.value() / static_cast<double>(count - 1);
  return {mean, std::sqrt(var / static_cast<double>(count))};
}

CharacteristicFunctionGrid empirical_cf(const ParticleEnsemble& e,
                                        std::vector<double> xi_grid) {
  if (e.sizes.empty()) throw DomainError("empirical cf: empty ensemble");
  const double inv_n = 1.0 / static_cast<double>(e.sizes.size());
  CharacteristicFunctionGrid out;
  out.xi = std::move(xi_grid);
  out.values.resize(out.xi.size());
  out.meta = CfProvenance::empirical;
  for (std::size_t i = 0; i < out.xi.size(); ++i) {
    const double xi = out.xi[i];
    if (xi == 0.0) {
      out.values[i] = 1.0;  // exact: every term is e^0
      continue;
    }
    CompensatedSum re;
    CompensatedSum im;
    for (double x : e.sizes) {
      re.add(std::cos(xi * x));
      im.add(-std::sin(xi * x));
    }
    out.values[i] = std::complex<double>(re.value() * inv_n,
                                         im.value() * inv_n);
  }
  return out;
}

HistogramResult histogram(const ParticleEnsemble& e,
                          const std::vector<double>& edges) {
  if (e.sizes.empty()) throw DomainError("histogram: empty ensemble");
  if (edges.size() < 5)
    throw DomainError("histogram: need at least 5 edges (4 bins)");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!(edges[i] > 0.0) || !std::isfinite(edges[i]))
      throw DomainError("histogram: edges must be positive and finite");
    if (i > 0 && !(edges[i] > edges[i - 1]))
      throw DomainError("histogram: edges must be strictly increasing");
  }
  const std::size_t bins = edges.size() - 1;
  const double l0 = std::log(edges.front());
  const double dl = (std::log(edges.back()) - l0) / static_cast<double>(bins);
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double expected = std::exp(l0 + dl * static_cast<double>(i));
    if (std::abs(edges[i] - expected) > 1e-9 * expected)
      throw DomainError("histogram: edges must be log-spaced");
  }

  std::vector<double> counts(bins, 0.0);
  double atom = 0.0;
  double under = 0.0;
  double over = 0.0;
  for (double x : e.sizes) {
    if (x == 0.0) {
      atom += 1.0;
    } else if (x < edges.front()) {
      under += 1.0;
    } else if (x > edges.back()) {
      over += 1.0;
    } else {
      auto b = static_cast<std::size_t>((std::log(x) - l0) / dl);
      b = std::min(b, bins - 1);
      // Rounding at the edge formula can be off by one cell; settle exactly.
      while (b > 0 && x < edges[b]) --b;
      while (b + 1 < bins && x >= edges[b + 1]) ++b;
      counts[b] += 1.0;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(e.sizes.size());
  std::vector<double> density(bins);
  for (std::size_t b = 0; b < bins; ++b)
    density[b] = counts[b] * inv_n / (edges[b + 1] - edges[b]);

  const double c_first = std::sqrt(edges[0] * edges[1]);
  const double c_last = std::sqrt(edges[bins - 1] * edges[bins]);
  HistogramResult out{
      GridDensity(LogGrid(c_first, c_last, bins), std::move(density),
                  atom * inv_n),
      under * inv_n, over * inv_n};
  return out;
}

}  // namespace gibrat
