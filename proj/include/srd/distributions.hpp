#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>

#include "srd/common.hpp"
#include "srd/special.hpp"

namespace srd {

// Nonzero-value laws. Parameters are validated by the DistributionSpec
// factories; the structs themselves are plain data.

struct Gaussian {
  double mean;
  double variance;
};

/// Continuous uniform law described by its mean (>= 0) and variance.
struct Uniform {
  double mean;
  double variance;
};

/// Symmetric four-atom law: +-b with mass (1-eps)/2 each and +-c with mass
/// eps/2 each, where c^2 = (power - (1-eps) b^2)/eps. With `limit` set the
/// law is the eps -> 0 limit: every truncation below beta = 1 sees only +-b,
/// while the untruncated power stays `power`.
struct PointMass {
  double floor_sq;  // b^2
  double power;     // gamma
  double mass;      // eps, ignored when limit is set
  bool limit;
};

/// X = Z + sgn(Z) b with Z ~ N(0, slice_variance).
struct SlicedGaussian {
  double floor;  // b
  double slice_variance;
};

enum class DistributionKind { gaussian, uniform, point_mass, sliced_gaussian };

inline const char* to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::gaussian: return "gaussian";
    case DistributionKind::uniform: return "uniform";
    case DistributionKind::point_mass: return "pointmass";
    case DistributionKind::sliced_gaussian: return "sliced";
  }
  return "?";
}

class DistributionSpec {
public:
  using variant_type = std::variant<Gaussian, Uniform, PointMass, SlicedGaussian>;

  static DistributionSpec gaussian(double mean, double variance) {
    detail::require(std::isfinite(mean), "gaussian: mean must be finite");
    detail::require(variance > 0.0 && std::isfinite(variance), "gaussian: variance must be > 0");
    return DistributionSpec(Gaussian{mean, variance});
  }

  static DistributionSpec uniform(double mean, double variance) {
    detail::require(mean >= 0.0 && std::isfinite(mean), "uniform: mean must be >= 0");
    detail::require(variance > 0.0 && std::isfinite(variance), "uniform: variance must be > 0");
    return DistributionSpec(Uniform{mean, variance});
  }

  static DistributionSpec point_mass(double floor_sq, double power, double mass) {
    detail::require(power > 0.0 && std::isfinite(power), "pointmass: power must be > 0");
    detail::require(floor_sq > 0.0, "pointmass: floor b^2 must be > 0 (Pr{X=0} must vanish)");
    detail::require(floor_sq <= power, "pointmass: floor b^2 must not exceed the power");
    detail::require(mass > 0.0 && mass < 1.0, "pointmass: mass eps must lie in (0,1)");
    return DistributionSpec(PointMass{floor_sq, power, mass, false});
  }

  static DistributionSpec point_mass_limit(double floor_sq, double power) {
    detail::require(power > 0.0 && std::isfinite(power), "pointmass: power must be > 0");
    detail::require(floor_sq > 0.0, "pointmass: floor b^2 must be > 0 (Pr{X=0} must vanish)");
    detail::require(floor_sq <= power, "pointmass: floor b^2 must not exceed the power");
    return DistributionSpec(PointMass{floor_sq, power, 0.0, true});
  }

  static DistributionSpec sliced_gaussian(double floor, double slice_variance) {
    detail::require(floor > 0.0 && std::isfinite(floor), "sliced: floor b must be > 0");
    detail::require(slice_variance > 0.0 && std::isfinite(slice_variance),
                    "sliced: slice variance must be > 0");
    return DistributionSpec(SlicedGaussian{floor, slice_variance});
  }

  /// Sliced Gaussian with floor b and total power gamma, i.e. the slice
  /// deviation solves b^2 + 2 b s sqrt(2/pi) + s^2 = gamma.
  static DistributionSpec sliced_gaussian_with_power(double floor, double power) {
    detail::require(floor > 0.0 && floor * floor < power, "sliced: need 0 < b^2 < power");
    const double c = floor * std::sqrt(2.0 / pi);
    const double s = -c + std::sqrt(c * c - floor * floor + power);
    return sliced_gaussian(floor, s * s);
  }

  DistributionKind kind() const { return static_cast<DistributionKind>(value_.index()); }
  const variant_type& value() const { return value_; }

  template <class T>
  const T* get_if() const { return std::get_if<T>(&value_); }

  bool has_density() const {
    return kind() != DistributionKind::point_mass;
  }

private:
  explicit DistributionSpec(variant_type v) : value_(v) {}
  variant_type value_;
};

struct Moments {
  double mean;
  double variance;
  double second_moment;
  std::optional<double> diff_entropy;  // empty when the law has no density
};

struct TruncationResult {
  double beta;
  double threshold;  // magnitude cutoff |x| <= threshold, in the law's own units
  double mean;
  double variance;
  std::optional<double> diff_entropy;

  double second_moment() const { return mean * mean + variance; }
};

struct DecayRate {
  double L;
};

inline Moments moments(const DistributionSpec& dist) {
  return std::visit(
      [](const auto& d) -> Moments {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return {d.mean, d.variance, d.mean * d.mean + d.variance,
                  0.5 * std::log(2.0 * pi * e * d.variance)};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return {d.mean, d.variance, d.mean * d.mean + d.variance,
                  0.5 * std::log(12.0 * d.variance)};
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return {0.0, d.power, d.power, std::nullopt};
        } else {
          const double s = std::sqrt(d.slice_variance);
          const double power =
              d.floor * d.floor + 2.0 * d.floor * s * std::sqrt(2.0 / pi) + d.slice_variance;
          return {0.0, power, power, 0.5 * std::log(2.0 * pi * e * d.slice_variance)};
        }
      },
      dist.value());
}

namespace detail {

inline TruncationResult untruncated(const DistributionSpec& dist) {
  const Moments m = moments(dist);
  double threshold = std::numeric_limits<double>::infinity();
  if (const auto* u = dist.get_if<Uniform>()) threshold = u->mean + std::sqrt(3.0 * u->variance);
  if (const auto* p = dist.get_if<PointMass>(); p && !p->limit)
    threshold = std::sqrt((p->power - (1.0 - p->mass) * p->floor_sq) / p->mass);
  return {1.0, threshold, m.mean, m.variance, m.diff_entropy};
}

// Doubly truncated normal on [-t, t] for N(mu, sigma^2) with mu != 0.
inline TruncationResult truncate_shifted_gaussian(const Gaussian& g, double beta) {
  const double sigma = std::sqrt(g.variance);
  const double mu = g.mean;
  auto mass = [&](double t) {
    return 0.5 * (std::erf((t - mu) / (sigma * std::numbers::sqrt2)) -
                  std::erf((-t - mu) / (sigma * std::numbers::sqrt2)));
  };
  double lo = 0.0;
  double hi = std::abs(mu) + sigma;
  while (mass(hi) < beta) hi *= 2.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = mass(t) - beta;
    if (f > 0.0) hi = t; else lo = t;
    const double deriv = (normal_pdf((t - mu) / sigma) + normal_pdf((-t - mu) / sigma)) / sigma;
    double next = t - f / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * t) break;
  }
  const double a = (-t - mu) / sigma;
  const double b = (t - mu) / sigma;
  const double z = mass(t);
  const double pa = normal_pdf(a);
  const double pb = normal_pdf(b);
  const double shift = (pa - pb) / z;
  const double tilt = (a * pa - b * pb) / z;
  TruncationResult r;
  r.beta = beta;
  r.threshold = t;
  r.mean = mu + sigma * shift;
  r.variance = g.variance * (1.0 + tilt - shift * shift);
  r.diff_entropy = std::log(std::sqrt(2.0 * pi * e) * sigma * z) + 0.5 * tilt;
  return r;
}

}  // namespace detail

/// Moments of the beta-truncated law: the law of X conditioned on |X| lying
/// in the smallest-magnitude beta fraction.
inline TruncationResult truncate(const DistributionSpec& dist, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw domain_error("truncate: beta must lie in (0,1]");
  if (beta == 1.0) return detail::untruncated(dist);

  return std::visit(
      [beta](const auto& d) -> TruncationResult {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          if (d.mean != 0.0) return detail::truncate_shifted_gaussian(d, beta);
          const double t = central_normal_quantile(beta);
          const double r = normal_truncated_second_moment(t);
          return {beta, t * std::sqrt(d.variance), 0.0, r * d.variance,
                  0.5 * (std::log(2.0 * pi * beta * beta * d.variance) + r)};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          const double half = std::sqrt(3.0 * d.variance);
          const double lo = d.mean - half;
          const double width = 2.0 * half;
          // Either the kept set is symmetric [-t, t] inside the support, or it
          // is [lo, lo + beta*width] once the lower edge is reached.
          double t = 0.0;
          if (lo < 0.0 && 0.5 * beta * width <= -lo) t = 0.5 * beta * width;
          else t = lo + beta * width;
          const double mean = std::max(0.0, d.mean - (1.0 - beta) * half);
          return {beta, t, mean, beta * beta * d.variance,
                  0.5 * std::log(12.0 * beta * beta * d.variance)};
        } else if constexpr (std::is_same_v<T, PointMass>) {
          const double b = std::sqrt(d.floor_sq);
          if (d.limit || beta <= 1.0 - d.mass) return {beta, b, 0.0, d.floor_sq, std::nullopt};
          const double var = d.power - (1.0 - beta) * (1.0 - d.mass) / (beta * d.mass) *
                                           (d.power - d.floor_sq);
          const double c = std::sqrt((d.power - (1.0 - d.mass) * d.floor_sq) / d.mass);
          return {beta, c, 0.0, var, std::nullopt};
        } else {
          const double s = std::sqrt(d.slice_variance);
          const double t = central_normal_quantile(beta);
          const double r = normal_truncated_second_moment(t);
          const double r_abs = std::sqrt(2.0 / pi) * -std::expm1(-0.5 * t * t) / beta;
          const double var = d.floor * d.floor + r * d.slice_variance + 2.0 * d.floor * s * r_abs;
          return {beta, d.floor + s * t, 0.0, var,
                  0.5 * (std::log(2.0 * pi * beta * beta * d.slice_variance) + r)};
        }
      },
      dist.value());
}

/// Exponent L with Pr{|X| <= x} ~ x^{1/L} near zero; 0 for laws bounded away
/// from zero.
inline DecayRate decay_rate(const DistributionSpec& dist) {
  switch (dist.kind()) {
    case DistributionKind::gaussian: return {1.0};
    case DistributionKind::uniform: {
      const auto& u = *dist.get_if<Uniform>();
      return {u.mean * u.mean <= 3.0 * u.variance ? 1.0 : 0.0};
    }
    case DistributionKind::point_mass:
    case DistributionKind::sliced_gaussian: return {0.0};
  }
  return {0.0};
}

/// Rescales X -> cX so that omega * E[(cX)^2] = target_power.
inline DistributionSpec scale_to_power(const DistributionSpec& dist, double omega,
                                       double target_power) {
  detail::require(target_power > 0.0 && std::isfinite(target_power),
                  "scale_to_power: target power must be > 0");
  detail::require(omega > 0.0 && omega <= 0.5, "scale_to_power: omega must lie in (0, 1/2]");
  const double c2 = target_power / (omega * moments(dist).second_moment);
  const double c = std::sqrt(c2);
  return std::visit(
      [&](const auto& d) -> DistributionSpec {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return DistributionSpec::gaussian(c * d.mean, c2 * d.variance);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return DistributionSpec::uniform(c * d.mean, c2 * d.variance);
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return d.limit ? DistributionSpec::point_mass_limit(c2 * d.floor_sq, c2 * d.power)
                         : DistributionSpec::point_mass(c2 * d.floor_sq, c2 * d.power, d.mass);
        } else {
          return DistributionSpec::sliced_gaussian(c * d.floor, c2 * d.slice_variance);
        }
      },
      dist.value());
}

/// One draw from the law. The eps -> 0 point-mass limit has no sampler.
template <class Rng>
double draw_value(const DistributionSpec& dist, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          std::normal_distribution<double> normal(d.mean, std::sqrt(d.variance));
          return normal(rng);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          const double half = std::sqrt(3.0 * d.variance);
          std::uniform_real_distribution<double> unif(d.mean - half, d.mean + half);
          double x = unif(rng);
          while (x == 0.0) x = unif(rng);
          return x;
        } else if constexpr (std::is_same_v<T, PointMass>) {
          if (d.limit) throw domain_error("draw_value: the eps->0 point-mass limit cannot be sampled");
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          const double u = unif(rng);
          const double sign = unif(rng) < 0.5 ? -1.0 : 1.0;
          if (u < d.mass) return sign * std::sqrt((d.power - (1.0 - d.mass) * d.floor_sq) / d.mass);
          return sign * std::sqrt(d.floor_sq);
        } else {
          std::normal_distribution<double> normal(0.0, std::sqrt(d.slice_variance));
          double z = normal(rng);
          while (z == 0.0) z = normal(rng);
          return z + (z > 0.0 ? d.floor : -d.floor);
        }
      },
      dist.value());
}

inline std::string describe(const DistributionSpec& dist) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          return "gaussian(mean=" + std::to_string(d.mean) + ",var=" + std::to_string(d.variance) + ")";
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return "uniform(mean=" + std::to_string(d.mean) + ",var=" + std::to_string(d.variance) + ")";
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return "pointmass(b2=" + std::to_string(d.floor_sq) + ",power=" + std::to_string(d.power) +
                 (d.limit ? ",eps->0)" : ",eps=" + std::to_string(d.mass) + ")");
        } else {
          return "sliced(b=" + std::to_string(d.floor) + ",var_z=" + std::to_string(d.slice_variance) + ")";
        }
      },
      dist.value());
}

}  // namespace srd
