#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "gibrat/cf_grid.hpp"
#include "gibrat/effects.hpp"
#include "gibrat/grid_density.hpp"

namespace gibrat {

// Population of firm sizes under Poisson-clocked multiplicative updates.
// `generation` counts evolve calls so that every call consumes fresh
// per-particle streams: stream(i) = f(seed, generation, i).  Identical
// (seed, parameters) therefore reproduce bit-identical ensembles, and the
// result cannot depend on any internal evaluation order.
struct ParticleEnsemble {
  std::vector<double> sizes;
  double time = 0.0;
  double frequency = 1.0;  // jump rate > 0
  std::uint64_t seed = 0;
  std::uint64_t generation = 0;
};

struct InitialDirac {
  double x0 = 1.0;
};
struct InitialLognormal {
  double t0 = 0.5;
  double mean = 1.0;
};
using InitialDatum = std::variant<InitialDirac, InitialLognormal, GridDensity>;

// n i.i.d. draws from the initial law at time 0.  Grid densities are sampled
// by inverse CDF (atom at zero included).
ParticleEnsemble init_ensemble(std::size_t n, const InitialDatum& initial,
                               std::uint64_t seed, double frequency = 1.0);

// Exact compound-Poisson step: each size gains K ~ Poisson(frequency * dtau)
// independent multiplicative updates drawn from d.  No time-discretization
// error; zeros are absorbing.
ParticleEnsemble evolve_exact(ParticleEnsemble e, const EffectDistribution& d,
                              double dtau);

struct MomentEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // plug-in: sample std of x^n over sqrt(N)
};
MomentEstimate empirical_moment(const ParticleEnsemble& e, int n);

// (1/N) sum_j exp(-i xi x_j) per grid point.
CharacteristicFunctionGrid empirical_cf(const ParticleEnsemble& e,
                                        std::vector<double> xi_grid);

// Mass-normalized histogram on log-spaced edges.  Zero sizes land in the
// atom; sizes outside the edge range are reported, never dropped.
struct HistogramResult {
  GridDensity density;
  double underflow = 0.0;
  double overflow = 0.0;
};
HistogramResult histogram(const ParticleEnsemble& e,
                          const std::vector<double>& edges);

}  // namespace gibrat
