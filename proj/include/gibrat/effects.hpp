#pragma once

#include <string>
#include <vector>

#include "gibrat/rng.hpp"

namespace gibrat {

// Plain description of an effect law, the unit of config round-trips.
struct EffectSpec {
  std::string kind;            // "two_point_first_order" | "symmetric_two_point"
                               // | "scaled_bounded"
  double epsilon = 0.0;
  std::vector<double> base_points;   // scaled_bounded only
  std::vector<double> base_weights;  // scaled_bounded only
};

// Finite discrete law of a centered multiplicative effect: a size x jumps to
// x(1 + V) where V takes values[i] with probability weights[i].
//
// Invariants (enforced at construction): weights > 0 and sum to 1 within
// 1e-15, every value > -1, and the mean effect is 0 within 1e-12 (exactly 0
// for the two-point families, whose atom products cancel in IEEE arithmetic).
class EffectDistribution {
 public:
  // Atoms {eps w.p. 1-eps, eps-1 w.p. eps}; requires 0 < eps < 1.
  // Second moment eps(1-eps).
  static EffectDistribution two_point_first_order(double eps);

  // Atoms {+sqrt(2 eps), -sqrt(2 eps)} w.p. 1/2 each; requires 0 < eps < 1/2
  // so the downward atom stays above -1.  Second moment 2 eps.
  static EffectDistribution symmetric_two_point(double eps);

  // Diffusion-scaled family sqrt(eps) * X where X is the centered discrete
  // law given by (base_points, base_weights).  Requires eps > 0 and finite,
  // base points finite and > -1 with sqrt(eps) * min(X) > -1, base weights
  // positive summing to 1, and |<X>| <= 1e-12.  The base support's upper
  // bound is whatever the caller supplies; no artificial cap is imposed.
  static EffectDistribution scaled_bounded(std::vector<double> base_points,
                                           std::vector<double> base_weights,
                                           double eps);

  static EffectDistribution from_spec(const EffectSpec& spec);
  EffectSpec describe() const;

  // <V^n>, compensated summation.  moment(0) = 1 exactly.
  double moment(int n) const;

  // Moment growth exponent of the jump process with frequency freq:
  // freq * <(1+V)^n - 1>, evaluated through the binomial identity
  // freq * sum_{k=2..n} C(n,k) <V^k> so that orders 0 and 1 vanish exactly
  // for any centered law.  Requires freq >= 0, n >= 0.
  double growth_rate(double freq, int n) const;

  // One draw of V (inverse-CDF scan over the atoms).
  double sample(Rng& rng) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::string& kind() const { return kind_; }
  double epsilon() const { return epsilon_; }

  // Moments of the unscaled base X for diffusion-scaled laws:
  // base_moment(2) is the sigma of the limit equation, base_moment(3) its
  // skew parameter.  symmetric_two_point reports its base X = ±sqrt(2).
  // two_point_first_order has no diffusion base and throws DomainError.
  double base_moment(int n) const;

 private:
  EffectDistribution() = default;

  std::string kind_;
  double epsilon_ = 0.0;
  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> base_points_;
  std::vector<double> base_weights_;
  std::vector<double> cumulative_;

  void finalize_and_check();
};

}  // namespace gibrat
