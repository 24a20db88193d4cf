#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "srd/common.hpp"
#include "srd/distributions.hpp"

namespace srd {

/// Binary entropy in nats, with H(0) = H(1) = 0.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("binary_entropy: p must lie in [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

/// Per-dimension rate (nats) needed to describe a support of density omega
/// to within distortion alpha, i.e. the exponent of the minimal covering of
/// size-k supports by overlap balls.
inline double rate_R(double omega, double alpha) {
  detail::require(omega > 0.0 && omega <= 0.5, "rate_R: omega must lie in (0, 1/2]");
  detail::require(alpha >= 0.0 && alpha <= 1.0, "rate_R: alpha must lie in [0,1]");
  if (alpha >= 1.0 - omega) return 0.0;
  const double r = binary_entropy(omega) - omega * binary_entropy(alpha) -
                   (1.0 - omega) * binary_entropy(omega * alpha / (1.0 - omega));
  // Rounding only: R vanishes continuously at alpha = 1 - omega.
  return std::max(0.0, r);
}

/// Hamming-distortion variant H(omega) - H(alpha). Documented alternative,
/// not used by any bound.
inline double rate_R_hamming(double omega, double alpha) {
  detail::require(omega > 0.0 && omega <= 0.5, "rate_R_hamming: omega must lie in (0, 1/2]");
  return std::max(0.0, binary_entropy(omega) - binary_entropy(alpha));
}

/// Delta(r) = (1-r)^(1 - 1/r) for r < 1, Delta(1) = 1. Ranges over (1, e).
inline double delta(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw domain_error("delta: r must lie in (0,1]");
  if (r == 1.0) return 1.0;
  // (1 - 1/r) log(1-r) = ((1-r)/r) * (-log(1-r))
  return std::exp(-(1.0 - r) / r * std::log1p(-r));
}

namespace detail {

// Pieces of the Marcenko-Pastur log-det formula in cancellation-free form.
// With a = sqrt(g(sqrt r + 1)^2 + 1), b = sqrt(g(sqrt r - 1)^2 + 1):
//   xi          = 4 g^2 r / (a+b)^2
//   x1 = 1+g-xi, x2 = 1+rg-xi, with x1 - 1 = g/x2 and x2 - 1 = r g/x1.
struct MpTerms {
  double xi;
  double xi_over_gamma;
  double log_x1;
  double log_x2;
};

inline MpTerms mp_terms(double r, double g) {
  const double sr = std::sqrt(r);
  const double a = std::sqrt(g * (sr + 1.0) * (sr + 1.0) + 1.0);
  const double b = std::sqrt(g * (sr - 1.0) * (sr - 1.0) + 1.0);
  const double apb = a + b;
  const double xi_over_gamma = 4.0 * g * r / (apb * apb);
  // ab - 1 = (g^2 (r-1)^2 + 2 g (r+1)) / (ab + 1)
  const double ab_m1 = (g * g * (r - 1.0) * (r - 1.0) + 2.0 * g * (r + 1.0)) / (a * b + 1.0);
  double x1m1 = 0.0;
  double x2m1 = 0.0;
  if (r < 1.0) {
    x1m1 = 0.5 * (g * (1.0 - r) + ab_m1);
    x2m1 = r * g / (1.0 + x1m1);
  } else {
    x2m1 = 0.5 * (g * (r - 1.0) + ab_m1);
    x1m1 = g / (1.0 + x2m1);
  }
  return {g * xi_over_gamma, xi_over_gamma, std::log1p(x1m1), std::log1p(x2m1)};
}

}  // namespace detail

inline double xi(double r, double gamma) {
  detail::require(r >= 0.0 && gamma >= 0.0, "xi: r and gamma must be >= 0");
  if (gamma == 0.0 || r == 0.0) return 0.0;
  return detail::mp_terms(r, gamma).xi;
}

/// Limit of (1/2n) E log det(I + (gamma/n) M M^T) for an m x n standard
/// Gaussian M with m/n -> r.
inline double info_G(double r, double gamma) {
  detail::require(r >= 0.0 && gamma >= 0.0, "info_G: r and gamma must be >= 0");
  if (gamma == 0.0 || r == 0.0) return 0.0;
  if (std::isinf(gamma)) return std::numeric_limits<double>::infinity();
  const auto t = detail::mp_terms(r, gamma);
  return std::max(0.0, 0.5 * (r * t.log_x1 + t.log_x2 - t.xi_over_gamma));
}

/// Entropy-power counterpart of info_G; never exceeds it.
inline double info_V(double r, double gamma) {
  detail::require(r >= 0.0 && gamma >= 0.0, "info_V: r and gamma must be >= 0");
  if (gamma == 0.0 || r == 0.0) return 0.0;
  if (r <= 1.0) return 0.5 * r * std::log1p(gamma / e * delta(r));
  return 0.5 * std::log1p(r * gamma / e * delta(1.0 / r));
}

/// Source-level functionals of (omega, F): power, variance, entropy power
/// and normalized entropy power theta = V_h / V.
struct SourceParams {
  double omega;
  DistributionSpec dist;
  Moments moments;
  double power;
  double variance;
  double entropy_power;
  double theta;
};

inline SourceParams source_functionals(double omega, const DistributionSpec& dist) {
  detail::require(omega > 0.0 && omega <= 0.5, "source_functionals: omega must lie in (0, 1/2]");
  const Moments m = moments(dist);
  const double power = omega * (m.mean * m.mean + m.variance);
  const double variance = omega * (1.0 - omega) * m.mean * m.mean + omega * m.variance;
  double vh = 0.0;
  if (m.diff_entropy) vh = omega * std::exp(2.0 * *m.diff_entropy) / (2.0 * pi * e);
  const double theta = vh > 0.0 ? vh / variance : 0.0;
  return {omega, dist, m, power, variance, vh, theta};
}

/// V(omega, F) and V_h(omega, F) evaluated on truncated moments.
inline double variance_functional(double omega, double mean, double variance) {
  return omega * (1.0 - omega) * mean * mean + omega * variance;
}

inline double entropy_power_functional(double omega, const std::optional<double>& entropy) {
  return entropy ? omega * std::exp(2.0 * *entropy) / (2.0 * pi * e) : 0.0;
}

}  // namespace srd
