#include "gibrat/oracles.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

using GL15 = boost::math::quadrature::gauss<double, 15>;

// Gaussian amplitude support: the standard normal mass outside +-9.5 is
// ~2e-21, far below every tolerance used here.
constexpr double kZLo = -9.5;
constexpr double kZHi = 9.5;

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

// Integrand of the lognormal CF in the standard-normal frame: the lognormal
// of mean m at diffusion age t is x = m e^{-t + sqrt(2t) z} with z standard
// normal, so f_hat(xi) = E[e^{-i xi x}] = int phi(z) e^{-i p(z)} dz with
// monotone phase p(z) = omega e^{-t + sqrt(2t) z}, omega = |xi| m.
struct CfFrame {
  double t;
  double rt;     // sqrt(2t)
  double omega;  // |xi| * m

  double phase(double z) const { return omega * std::exp(-t + rt * z); }
  // z at which the phase equals a (phase is increasing in z)
  double z_of_phase(double a) const { return (std::log(a / omega) + t) / rt; }

  std::complex<double> integrand(double z) const {
    const double p = phase(z);
    return std_normal_pdf(z) * std::complex<double>(std::cos(p), -std::sin(p));
  }
};

// GL15 over [a, b] split into subpanels of width <= h.
std::complex<double> panel_gl15(const CfFrame& f, double a, double b,
                                double h) {
  const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
  const double w = (b - a) / parts;
  std::complex<double> acc = 0.0;
  for (int i = 0; i < parts; ++i) {
    const double lo = a + w * i;
    const double hi = (i == parts - 1) ? b : lo + w;
    const auto re = GL15::integrate(
        [&](double z) { return f.integrand(z).real(); }, lo, hi);
    const auto im = GL15::integrate(
        [&](double z) { return f.integrand(z).imag(); }, lo, hi);
    acc += std::complex<double>(re, im);
  }
  return acc;
}

// Repeated pairwise averaging of a partial-sum sequence (Euler-style
// acceleration for the alternating panel series).  Feeding S_n updates the
// whole diagonal; estimate() is the deepest average.
class AveragingTable {
 public:
  void feed(std::complex<double> s) {
    std::complex<double> carry = s;
    for (std::size_t l = 0; l < row_.size(); ++l) {
      const std::complex<double> old = row_[l];
      row_[l] = carry;
      carry = 0.5 * (old + carry);
    }
    if (row_.size() < 64) row_.push_back(carry);
    last_ = estimate_;
    estimate_ = row_.back();
    ++count_;
  }
  std::complex<double> estimate() const { return estimate_; }
  bool stable(double tol) const {
    return count_ >= 3 && std::abs(estimate_ - last_) <= tol;
  }

 private:
  std::vector<std::complex<double>> row_;
  std::complex<double> estimate_ = 0.0;
  std::complex<double> last_ = 0.0;
  long count_ = 0;
};

// One full evaluation at refinement level L (max subpanel width 2^-L).
std::complex<double> lognormal_cf_level(double t, double m, double axi,
                                        int level, double inner_tol) {
  const CfFrame f{t, std::sqrt(2.0 * t), axi * m};
  const double h = std::ldexp(1.0, -level);

  // First phase breakpoint at or above kZLo; everything below contributes
  // less than the Gaussian tail mass.
  const double phase_lo = f.phase(kZLo);
  long k = std::max(1L, static_cast<long>(std::floor(phase_lo / kPi)) + 1);
  const double z_first = std::min(f.z_of_phase(kPi * static_cast<double>(k)),
                                  kZHi);

  std::complex<double> head = panel_gl15(f, kZLo, std::max(z_first, kZLo), h);
  if (z_first >= kZHi) return head;

  // Alternating pi-phase panels, accelerated.  If the Gaussian support ends
  // first the plain partial sum is already the full integral.
  AveragingTable table;
  CompensatedSum plain_re;
  CompensatedSum plain_im;
  double z_a = z_first;
  int tiny_streak = 0;
  while (true) {
    ++k;
    const double z_b = f.z_of_phase(kPi * static_cast<double>(k));
    const bool last = z_b >= kZHi;
    const std::complex<double> s =
        panel_gl15(f, z_a, std::min(z_b, kZHi), h);
    plain_re.add(s.real());
    plain_im.add(s.imag());
    table.feed({plain_re.value(), plain_im.value()});
    if (last) return head + std::complex<double>(plain_re.value(),
                                                 plain_im.value());
    tiny_streak = std::abs(s) < inner_tol * 1e-4 ? tiny_streak + 1 : 0;
    if (tiny_streak >= 2 || table.stable(inner_tol)) break;
    z_a = z_b;
  }
  return head + table.estimate();
}

double agreement_tol(const QuadratureSpec& spec, double magnitude) {
  return std::max(spec.abs_tol, spec.rel_tol * magnitude);
}

}  // namespace

Audited<std::complex<double>> lognormal_cf_quadrature_audited(
    double t, double m, double xi, const QuadratureSpec& spec) {
  if (!(t > 0.0)) throw DomainError("lognormal cf: need t > 0");
  if (!(m > 0.0)) throw DomainError("lognormal cf: need m > 0");
  if (xi == 0.0) return {1.0, 1.0, 0};

  const double axi = std::abs(xi);
  const double inner_tol = spec.abs_tol * 0.01;
  Audited<std::complex<double>> out;
  std::complex<double> prev = lognormal_cf_level(t, m, axi, 2, inner_tol);
  for (int level = 3; level <= 2 + spec.max_refinements; ++level) {
    const std::complex<double> cur =
        lognormal_cf_level(t, m, axi, level, inner_tol);
    if (std::abs(cur - prev) <= agreement_tol(spec, std::abs(cur))) {
      out.value = xi < 0.0 ? std::conj(cur) : cur;
      out.previous = xi < 0.0 ? std::conj(prev) : prev;
      out.refinements = level - 2;
      return out;
    }
    prev = cur;
  }
  std::ostringstream msg;
  msg << "lognormal cf: no convergence at xi = " << xi << ", t = " << t
      << "; last iterates " << prev << " and level cap reached";
  throw NumericError(msg.str());
}

std::complex<double> lognormal_cf_quadrature(double t, double m, double xi,
                                             const QuadratureSpec& spec) {
  return lognormal_cf_quadrature_audited(t, m, xi, spec).value;
}

double heat_kernel(double t, double y) {
  if (!(t > 0.0)) throw DomainError("heat kernel: need t > 0");
  return std::exp(-y * y / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

namespace {

// log of x^n * density(x) at y = log x; -inf where the density vanishes.
double log_moment_integrand(const std::function<double(double)>& density,
                            int n, double y) {
  const double rho = density(std::exp(y));
  if (!(rho > 0.0)) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(n + 1) * y + std::log(rho);
}

double moment_level(const std::function<double(double)>& density, int n,
                    double y_lo, double y_hi, int level) {
  const double h = 0.5 * std::ldexp(1.0, -level);
  const int parts =
      std::max(1, static_cast<int>(std::ceil((y_hi - y_lo) / h)));
  const double w = (y_hi - y_lo) / parts;
  CompensatedSum acc;
  for (int i = 0; i < parts; ++i) {
    const double a = y_lo + w * i;
    const double b = (i == parts - 1) ? y_hi : a + w;
    acc.add(GL15::integrate(
        [&](double y) {
          const double lg = log_moment_integrand(density, n, y);
          return lg > -700.0 ? std::exp(lg) : 0.0;
        },
        a, b));
  }
  return acc.value();
}

}  // namespace

Audited<double> brute_moment_audited(
    const std::function<double(double)>& density, int n,
    const QuadratureSpec& spec) {
  if (n < 0) throw DomainError("brute moment: order must be >= 0");

  // Bracket the support: coarse scan of the log-integrand, keep everything
  // within 50 e-folds of the peak, then pad.
  const double scan_lo = -70.0;
  const double scan_hi = 70.0;
  const double scan_step = 0.1;
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> lg;
  lg.reserve(1401);
  for (double y = scan_lo; y <= scan_hi + 1e-12; y += scan_step) {
    const double v = log_moment_integrand(density, n, y);
    if (v > 700.0)
      throw NumericError("brute moment: integrand overflows double range");
    lg.push_back(v);
    peak = std::max(peak, v);
  }
  if (!std::isfinite(peak))
    throw NumericError("brute moment: integrand vanishes on the scan range");
  double y_lo = scan_hi;
  double y_hi = scan_lo;
  for (std::size_t i = 0; i < lg.size(); ++i) {
    if (lg[i] > peak - 50.0) {
      const double y = scan_lo + scan_step * static_cast<double>(i);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  y_lo = std::max(scan_lo, y_lo - 2.0);
  y_hi = std::min(scan_hi, y_hi + 2.0);

  Audited<double> out;
  double prev = moment_level(density, n, y_lo, y_hi, 0);
  for (int level = 1; level <= spec.max_refinements; ++level) {
    const double cur = moment_level(density, n, y_lo, y_hi, level);
    if (std::abs(cur - prev) <= agreement_tol(spec, std::abs(cur))) {
      out.value = cur;
      out.previous = prev;
      out.refinements = level;
      return out;
    }
    prev = cur;
  }
  std::ostringstream msg;
  msg << "brute moment: no convergence for order " << n << "; last iterate "
      << prev;
  throw NumericError(msg.str());
}

double brute_moment(const std::function<double(double)>& density, int n,
                    const QuadratureSpec& spec) {
  return brute_moment_audited(density, n, spec).value;
}

ResidualField pde_residual(const std::function<double(double, double)>& u_fn,
                           const std::vector<double>& x_grid, double t,
                           double delta) {
  if (!(delta > 0.0) || !(delta < 0.5))
    throw DomainError("pde residual: need 0 < delta < 1/2");
  if (!(t > 0.0)) throw DomainError("pde residual: need t > 0");

  ResidualField out;
  out.one_sided_time = t - delta <= 0.0;
  out.residual.reserve(x_grid.size());

  const auto g = [&](double x) { return x * x * u_fn(x, t); };
  for (double x : x_grid) {
    if (!(x > 0.0)) throw DomainError("pde residual: grid must be positive");
    const double h = delta * x;
    // 5-point fourth-order second derivative of x^2 u in x.
    const double d2 = (-g(x + 2 * h) + 16.0 * g(x + h) - 30.0 * g(x) +
                       16.0 * g(x - h) - g(x - 2 * h)) /
                      (12.0 * h * h);
    const double dt = out.one_sided_time
                          ? (u_fn(x, t + delta) - u_fn(x, t)) / delta
                          : (u_fn(x, t + delta) - u_fn(x, t - delta)) /
                                (2.0 * delta);
    const double r = dt - d2;
    out.residual.push_back(r);
    out.max_norm = std::max(out.max_norm, std::abs(r));
  }
  return out;
}

}  // namespace gibrat
