#include "gibrat/effects.hpp"

#include <cmath>
#include <limits>

#include "gibrat/compensated.hpp"
#include "gibrat/errors.hpp"

namespace gibrat {

namespace {

double binomial_coefficient(int n, int k) {
  // Exact in double for every n reachable here (moment orders are small).
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / i;
  return c;
}

}  // namespace

void EffectDistribution::finalize_and_check() {
  if (values_.empty() || values_.size() != weights_.size())
    throw DomainError("effect: atoms and weights must be non-empty and match");
  CompensatedSum wsum;
  CompensatedSum mean;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    const double w = weights_[i];
    if (!std::isfinite(v) || v <= -1.0)
      throw DomainError("effect: atoms must be finite and > -1");
    if (!std::isfinite(w) || w <= 0.0)
      throw DomainError("effect: weights must be finite and > 0");
    wsum.add(w);
    mean.add(w * v);
  }
  if (std::abs(wsum.value() - 1.0) > 1e-15)
    throw DomainError("effect: weights must sum to 1 within 1e-15");
  if (std::abs(mean.value()) > 1e-12)
    throw DomainError("effect: law must be centered; measured <V> = " +
                      std::to_string(mean.value()));
  cumulative_.resize(weights_.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc.add(weights_[i]);
    cumulative_[i] = acc.value();
  }
  cumulative_.back() = 1.0;
}

EffectDistribution EffectDistribution::two_point_first_order(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw DomainError("two_point_first_order: eps must lie in (0, 1)");
  EffectDistribution d;
  d.kind_ = "two_point_first_order";
  d.epsilon_ = eps;
  d.values_ = {eps, eps - 1.0};
  d.weights_ = {1.0 - eps, eps};
  d.finalize_and_check();
  return d;
}

EffectDistribution EffectDistribution::symmetric_two_point(double eps) {
  if (!(eps > 0.0) || !(eps < 0.5))
    throw DomainError("symmetric_two_point: eps must lie in (0, 1/2)");
  EffectDistribution d;
  d.kind_ = "symmetric_two_point";
  d.epsilon_ = eps;
  const double a = std::sqrt(2.0 * eps);
  d.values_ = {a, -a};
  d.weights_ = {0.5, 0.5};
  d.base_points_ = {std::sqrt(2.0), -std::sqrt(2.0)};
  d.base_weights_ = {0.5, 0.5};
  d.finalize_and_check();
  return d;
}

EffectDistribution EffectDistribution::scaled_bounded(
    std::vector<double> base_points, std::vector<double> base_weights,
    double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw DomainError("scaled_bounded: scale must be positive");
  if (base_points.empty() || base_points.size() != base_weights.size())
    throw DomainError("scaled_bounded: base points/weights must match");
  CompensatedSum mean;
  double min_point = base_points.front();
  for (std::size_t i = 0; i < base_points.size(); ++i) {
    if (!std::isfinite(base_points[i]))
      throw DomainError("scaled_bounded: base points must be finite");
    if (!std::isfinite(base_weights[i]) || base_weights[i] <= 0.0)
      throw DomainError("scaled_bounded: base weights must be > 0");
    mean.add(base_weights[i] * base_points[i]);
    if (base_points[i] < min_point) min_point = base_points[i];
  }
  if (std::abs(mean.value()) > 1e-12)
    throw DomainError("scaled_bounded: base law must be centered; measured <X> = " +
                      std::to_string(mean.value()));
  if (!(std::sqrt(eps) * min_point > -1.0))
    throw DomainError("scaled_bounded: sqrt(eps) * min(X) must exceed -1");
  EffectDistribution d;
  d.kind_ = "scaled_bounded";
  d.epsilon_ = eps;
  const double scale = std::sqrt(eps);
  d.values_.reserve(base_points.size());
  for (const double x : base_points) d.values_.push_back(scale * x);
  d.weights_ = base_weights;
  d.base_points_ = std::move(base_points);
  d.base_weights_ = std::move(base_weights);
  d.finalize_and_check();
  return d;
}

EffectDistribution EffectDistribution::from_spec(const EffectSpec& spec) {
  if (spec.kind == "two_point_first_order")
    return two_point_first_order(spec.epsilon);
  if (spec.kind == "symmetric_two_point")
    return symmetric_two_point(spec.epsilon);
  if (spec.kind == "scaled_bounded")
    return scaled_bounded(spec.base_points, spec.base_weights, spec.epsilon);
  throw DomainError("effect: unknown kind '" + spec.kind + "'");
}

EffectSpec EffectDistribution::describe() const {
  EffectSpec spec;
  spec.kind = kind_;
  spec.epsilon = epsilon_;
  if (kind_ == "scaled_bounded") {
    spec.base_points = base_points_;
    spec.base_weights = base_weights_;
  }
  return spec;
}

double EffectDistribution::moment(int n) const {
  if (n < 0) throw DomainError("effect moment: order must be >= 0");
  if (n == 0) return 1.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < values_.size(); ++i)
    acc.add(weights_[i] * std::pow(values_[i], n));
  return acc.value();
}

double EffectDistribution::growth_rate(double freq, int n) const {
  if (!(freq >= 0.0) || !std::isfinite(freq))
    throw DomainError("growth_rate: frequency must be finite and >= 0");
  if (n < 0) throw DomainError("growth_rate: order must be >= 0");
  // freq * (<(1+V)^n> - 1) expanded binomially; the k=0 and k=1 terms cancel
  // for a centered law, so dropping them makes orders 0 and 1 exact zeros.
  CompensatedSum acc;
  for (int k = 2; k <= n; ++k)
    acc.add(binomial_coefficient(n, k) * moment(k));
  return freq * acc.value();
}

double EffectDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return values_[i];
  return values_.back();
}

double EffectDistribution::base_moment(int n) const {
  if (base_points_.empty())
    throw DomainError("base_moment: effect has no diffusion-scaled base");
  if (n < 0) throw DomainError("base_moment: order must be >= 0");
  if (n == 0) return 1.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < base_points_.size(); ++i)
    acc.add(base_weights_[i] * std::pow(base_points_[i], n));
  return acc.value();
}

}  // namespace gibrat
