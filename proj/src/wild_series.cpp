#include "gibrat/wild_series.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {
namespace {

// Per-entry absolute weight floor for the flattened (scale, weight) tables.
// Dropped mass is below count * 1e-22 ~ 1e-15, and row renormalization folds
// it back, so the reported tail_mass stays the only truncation of record.
constexpr double kEntryDrop = 1e-22;
// Composition-weight floor for effects with three or more atoms, and a cap
// on enumerated leaves so k_max stays the only unbounded axis.
constexpr double kTreeDrop = 1e-16;
constexpr long kTreeLeafCap = 20'000'000;
// Stage tables beyond this size would exhaust memory before k_cap does.
constexpr std::size_t kTableCap = 60'000'000;

double log_int(long k) { return std::log(static_cast<double>(k)); }

// Upper tail P(K > k) and CDF-complement helpers for K ~ Poisson(tau),
// through the regularized incomplete gamma (exact up to machine rounding,
// no factorial overflow).
double poisson_upper_tail(long k, double tau) {
  return boost::math::gamma_p(static_cast<double>(k + 1), tau);
}
double poisson_cdf_below(long k, double tau) {
  // P(K < k) = P(K <= k-1); 0 for k = 0.
  if (k <= 0) return 0.0;
  return boost::math::gamma_q(static_cast<double>(k), tau);
}

struct StageEntry {
  double scale;   // product of update factors (1 + eta_i)
  double weight;  // Poisson(k) weight times the atom-pattern probability
};

// log Poisson weight, -tau + k log tau - log k!.
double log_pois(long k, double tau) {
  return -tau + static_cast<double>(k) * std::log(tau) -
         std::lgamma(static_cast<double>(k) + 1.0);
}

// One weighted-binomial row for a two-atom effect: appends entries
// (v1^{n-j} v2^j, pois_k * C(n,j) w1^{n-j} w2^j) for the j's whose final
// weight clears the drop floor.  The row is renormalized so its kept weights
// sum to exactly pois_k (the binomial theorem gives 1 for the full row),
// which removes lgamma rounding drift from the weight budget.
void append_two_atom_row(std::vector<StageEntry>& out, long n, double pois_k,
                         double lw1, double lw2, double lv1, double lv2) {
  if (n == 0) {
    out.push_back({1.0, pois_k});
    return;
  }
  const double w2 = std::exp(lw2);
  // Mode of the weighted binomial; log row value there via lgamma.
  long jm = std::clamp(static_cast<long>((static_cast<double>(n) + 1.0) * w2),
                       0L, n);
  const auto lrow = [&](long j) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(n - j) + 1.0) +
           static_cast<double>(n - j) * lw1 + static_cast<double>(j) * lw2;
  };
  const double lb_mode = lrow(jm);
  const double lb_floor = std::log(kEntryDrop) - std::log(pois_k);

  // Walk outward from the mode while entries clear the floor; the row is
  // unimodal so both walks stop at the true window edges.
  const std::size_t first = out.size();
  CompensatedSum row_sum;
  double lb = lb_mode;
  for (long j = jm; j >= 0 && lb >= lb_floor; --j) {
    const double rel = std::exp(lb - lb_mode);
    row_sum.add(rel);
    out.push_back({std::exp(static_cast<double>(n - j) * lv1 +
                            static_cast<double>(j) * lv2),
                   rel});
    if (j > 0) lb += log_int(j) - log_int(n - j + 1) + lw1 - lw2;
  }
  lb = lb_mode;
  for (long j = jm + 1; j <= n; ++j) {
    lb += log_int(n - j + 1) - log_int(j) + lw2 - lw1;
    if (lb < lb_floor) break;
    const double rel = std::exp(lb - lb_mode);
    row_sum.add(rel);
    out.push_back({std::exp(static_cast<double>(n - j) * lv1 +
                            static_cast<double>(j) * lv2),
                   rel});
  }
  const double norm = pois_k / row_sum.value();
  for (std::size_t i = first; i < out.size(); ++i) out[i].weight *= norm;
}

// Composition enumeration for m >= 3 atoms: every split of n update slots
// among the atoms, weight = multinomial(n; c) * prod w_i^{c_i}.  Kept terms
// are renormalized to pois_k like the binomial rows.
struct TreeContext {
  const std::vector<double>& lw;  // log atom weights
  const std::vector<double>& lv;  // log atom values (1 + eta)
  long n = 0;
  long leaves = 0;
  std::vector<StageEntry>* out = nullptr;
  CompensatedSum row_sum;
};

void enumerate_compositions(TreeContext& ctx, std::size_t atom, long left,
                            double lw_acc, double lv_acc) {
  if (atom + 1 == ctx.lw.size()) {
    const double lw_total =
        lw_acc + static_cast<double>(left) * ctx.lw[atom] -
        std::lgamma(static_cast<double>(left) + 1.0) +
        std::lgamma(static_cast<double>(ctx.n) + 1.0);
    const double w = std::exp(lw_total);
    if (++ctx.leaves > kTreeLeafCap)
      throw ResourceError(
          "wild series: composition tree too large; use a two-atom effect "
          "or a smaller effective time");
    if (w < kTreeDrop) return;
    ctx.row_sum.add(w);
    ctx.out->push_back(
        {std::exp(lv_acc + static_cast<double>(left) * ctx.lv[atom]), w});
    return;
  }
  for (long c = 0; c <= left; ++c) {
    enumerate_compositions(
        ctx, atom + 1, left - c,
        lw_acc + static_cast<double>(c) * ctx.lw[atom] -
            std::lgamma(static_cast<double>(c) + 1.0),
        lv_acc + static_cast<double>(c) * ctx.lv[atom]);
  }
}

void append_multi_atom_row(std::vector<StageEntry>& out,
                           const std::vector<double>& lw,
                           const std::vector<double>& lv, long n,
                           double pois_k, long& leaf_budget_used) {
  TreeContext ctx{lw, lv, n, leaf_budget_used, &out, {}};
  const std::size_t first = out.size();
  enumerate_compositions(ctx, 0, n, 0.0, 0.0);
  leaf_budget_used = ctx.leaves;
  if (out.size() == first)
    throw NumericError("wild series: a whole coefficient row fell below the "
                       "composition weight floor");
  const double norm = pois_k / ctx.row_sum.value();
  for (std::size_t i = first; i < out.size(); ++i) out[i].weight *= norm;
}

std::vector<double> log_all(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log(v[i]);
  return out;
}

// Flattened (scale, weight) table of the truncated series: one entry per
// kept atom pattern per kept Poisson count.  Shared across all xi.
std::vector<StageEntry> build_stage_table(const EffectDistribution& d,
                                          double tau, long k_lo, long k_max) {
  std::vector<StageEntry> table;
  std::vector<double> lv;
  {
    std::vector<double> mult(d.values());
    for (double& v : mult) v += 1.0;
    lv = log_all(mult);
  }
  const std::vector<double> lw = log_all(d.weights());
  long leaves = 0;
  for (long k = k_lo; k <= k_max; ++k) {
    const double pois_k = std::exp(log_pois(k, tau));
    if (lv.size() == 1) {
      table.push_back({std::exp(static_cast<double>(k) * lv[0]), pois_k});
    } else if (lv.size() == 2) {
      append_two_atom_row(table, k, pois_k, lw[0], lw[1], lv[0], lv[1]);
    } else {
      append_multi_atom_row(table, lw, lv, k, pois_k, leaves);
    }
    if (table.size() > kTableCap)
      throw ResourceError(
          "wild series: stage table exceeds the memory budget; lower the "
          "effective time or loosen the tolerance");
  }
  return table;
}

std::complex<double> eval_table(const std::vector<StageEntry>& table,
                                const InitialCf& f0, double xi) {
  CompensatedSum re;
  CompensatedSum im;
  if (f0.dirac_at) {
    const double x0 = *f0.dirac_at;
    for (const StageEntry& e : table) {
      const double phase = e.scale * xi * x0;
      re.add(e.weight * std::cos(phase));
      im.add(-e.weight * std::sin(phase));
    }
  } else {
    for (const StageEntry& e : table) {
      const std::complex<double> v = f0.eval(e.scale * xi);
      re.add(e.weight * v.real());
      im.add(e.weight * v.imag());
    }
  }
  return {re.value(), im.value()};
}

}  // namespace

InitialCf InitialCf::dirac(double x0) {
  if (!(x0 >= 0.0) || !std::isfinite(x0))
    throw DomainError("initial cf: point mass location must be >= 0");
  InitialCf out;
  out.eval = [x0](double xi) {
    return std::complex<double>(std::cos(xi * x0), -std::sin(xi * x0));
  };
  out.dirac_at = x0;
  return out;
}

InitialCf InitialCf::custom(std::function<std::complex<double>(double)> fn) {
  if (!fn) throw DomainError("initial cf: empty evaluator");
  InitialCf out;
  out.eval = std::move(fn);
  return out;
}

WildTruncation poisson_truncation(double tau, double tol) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw DomainError("poisson truncation: need finite tau >= 0");
  if (!(tol > 0.0) || !(tol < 1.0))
    throw DomainError("poisson truncation: need 0 < tol < 1");
  if (tau == 0.0) return {0.0, 0, 0.0};

  const long k_floor = static_cast<long>(std::ceil(tau));
  long lo = k_floor;
  if (poisson_upper_tail(lo, tau) > tol) {
    long hi = lo;
    long step = 8;
    while (poisson_upper_tail(hi, tau) > tol) {
      hi += step;
      step *= 2;
    }
    // Smallest k in (lo, hi] with tail <= tol.
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      (poisson_upper_tail(mid, tau) <= tol ? hi : lo) = mid;
    }
    lo = hi;
  }
  return {tau, lo, poisson_upper_tail(lo, tau)};
}

std::complex<double> wild_coefficient_cf(const InitialCf& f0,
                                         const EffectDistribution& d, long k,
                                         double xi) {
  if (k < 1)
    throw DomainError("wild coefficient: index must be >= 1");
  const long n = k - 1;  // number of update factors in the k-th coefficient
  std::vector<StageEntry> row;
  std::vector<double> lv;
  {
    std::vector<double> mult(d.values());
    for (double& v : mult) v += 1.0;
    lv = log_all(mult);
  }
  const std::vector<double> lw = log_all(d.weights());
  if (lv.size() == 1) {
    row.push_back({std::exp(static_cast<double>(n) * lv[0]), 1.0});
  } else if (lv.size() == 2) {
    append_two_atom_row(row, n, 1.0, lw[0], lw[1], lv[0], lv[1]);
  } else {
    long leaves = 0;
    append_multi_atom_row(row, lw, lv, n, 1.0, leaves);
  }
  return eval_table(row, f0, xi);
}

WildResult wild_cf(const InitialCf& f0, const EffectDistribution& d,
                   double tau, std::vector<double> xi_grid,
                   const WildOptions& opts) {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw DomainError("wild cf: need finite tau >= 0");

  WildResult out;
  out.truncation = poisson_truncation(tau, opts.tol);
  if (out.truncation.k_max > opts.k_cap) {
    std::ostringstream msg;
    msg << "wild cf: tolerance " << opts.tol << " at tau = " << tau
        << " needs k_max = " << out.truncation.k_max << " beyond the cap "
        << opts.k_cap;
    throw ResourceError(msg.str());
  }

  // Drop the negligible low-count head as well: its mass bound is far below
  // the reported tail so the truncation record stays honest.
  long k_lo = 0;
  if (tau > 0.0) {
    const double head_tol = std::min(1e-18, opts.tol * 1e-6);
    long lo = 0;
    long hi = static_cast<long>(std::floor(tau));
    // Largest k with P(K < k) <= head_tol; lo always satisfies it.
    while (lo < hi) {
      const long mid = lo + (hi - lo + 1) / 2;
      if (poisson_cdf_below(mid, tau) <= head_tol)
        lo = mid;
      else
        hi = mid - 1;
    }
    k_lo = lo;
  }

  std::vector<StageEntry> table =
      tau == 0.0 ? std::vector<StageEntry>{{1.0, 1.0}}
                 : build_stage_table(d, tau, k_lo, out.truncation.k_max);

  out.cf.xi = std::move(xi_grid);
  out.cf.values.resize(out.cf.xi.size());
  out.cf.meta = CfProvenance::wild;

  // Point-mass initial data have a real underlying density, so mirrored
  // frequencies are exact conjugates; compute each |xi| once.
  const bool mirror = f0.dirac_at.has_value();
  for (std::size_t i = 0; i < out.cf.xi.size(); ++i) {
    const double xi = out.cf.xi[i];
    if (mirror && xi < 0.0) continue;
    out.cf.values[i] = eval_table(table, f0, xi);
  }
  if (mirror) {
    for (std::size_t i = 0; i < out.cf.xi.size(); ++i) {
      const double xi = out.cf.xi[i];
      if (xi >= 0.0) continue;
      bool found = false;
      for (std::size_t j = 0; j < out.cf.xi.size() && !found; ++j) {
        if (out.cf.xi[j] == -xi) {
          out.cf.values[i] = std::conj(out.cf.values[j]);
          found = true;
        }
      }
      if (!found) out.cf.values[i] = eval_table(table, f0, xi);
    }
  }
  return out;
}

WildResult lognormal_cf_approx(double t, double eps,
                               std::vector<double> xi_grid,
                               const WildOptions& opts) {
  if (!(t > 0.0)) throw DomainError("lognormal cf approx: need t > 0");
  if (!(eps > 0.0) || !(eps < 0.5))
    throw DomainError("lognormal cf approx: need 0 < eps < 1/2");
  return wild_cf(InitialCf::dirac(1.0),
                 EffectDistribution::symmetric_two_point(eps), t / eps,
                 std::move(xi_grid), opts);
}

}  // namespace gibrat
