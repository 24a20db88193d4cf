#pragma once

#include <cmath>
#include <limits>

#include "srd/common.hpp"

namespace srd {

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
}

/// Gaussian tail probability Q(x) = Pr{Z > x} for standard normal Z.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Inverse of q_function on (0,1).
///
/// Bisection keeps a bracket on [-40, 40]; Newton steps on log Q are taken
/// whenever they stay inside the bracket. Converges to
/// |Q(x) - p| <= 1e-13 (and to full relative precision in the far tail).
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("q_inverse: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  // Q is decreasing: Q(lo) > p > Q(hi).
  double lo = -40.0;
  double hi = 40.0;
  double x = 0.0;
  const double log_p = std::log(p);
  for (int it = 0; it < 200; ++it) {
    const double q = q_function(x);
    if (q > p) lo = x; else hi = x;
    // Newton on f(x) = log Q(x) - log p, f'(x) = -phi(x)/Q(x).
    double next = x;
    if (q > 0.0) {
      const double f = std::log(q) - log_p;
      const double fp = -normal_pdf(x) / q;
      next = x - f / fp;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x))) break;
  }
  return x;
}

/// Half-width t such that Pr{|Z| <= t} = beta for standard normal Z, i.e.
/// t = Q^{-1}((1-beta)/2). Small beta is solved against erf directly so that
/// t/beta keeps full relative precision.
inline double central_normal_quantile(double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw domain_error("central_normal_quantile: beta must lie in (0,1)");
  if (beta >= 0.5) return q_inverse(0.5 * (1.0 - beta));
  double t = beta * std::sqrt(pi / 2.0);
  for (int it = 0; it < 100; ++it) {
    const double f = std::erf(t / std::numbers::sqrt2) - beta;
    const double step = f / (2.0 * normal_pdf(t));
    t -= step;
    if (std::abs(step) <= 2.0 * std::numeric_limits<double>::epsilon() * t) break;
  }
  return t;
}

/// r(t) = E[Z^2 | |Z| <= t] for standard normal Z.
///
/// Equals 1 - 2 t phi(t) / Pr{|Z|<=t}; a power series in t^2 is used for
/// small t where the closed form cancels.
inline double normal_truncated_second_moment(double t) {
  if (!(t >= 0.0)) throw domain_error("normal_truncated_second_moment: t must be >= 0");
  if (std::isinf(t)) return 1.0;
  if (t == 0.0) return 0.0;
  if (t < 0.5) {
    // int_0^t z^2 e^{-z^2/2} dz over int_0^t e^{-z^2/2} dz, termwise.
    const double t2 = t * t;
    double num = 0.0;
    double den = 0.0;
    double coef = 1.0;  // (-1/2)^j / j!
    double pw = 1.0;    // t^{2j}
    for (int j = 0; j < 40; ++j) {
      num += coef * pw * t2 / (2.0 * j + 3.0);
      den += coef * pw / (2.0 * j + 1.0);
      coef *= -0.5 / (j + 1.0);
      pw *= t2;
      if (std::abs(coef * pw) < 1e-20) break;
    }
    return num / den;
  }
  const double mass = std::erf(t / std::numbers::sqrt2);
  return 1.0 - 2.0 * t * normal_pdf(t) / mass;
}

}  // namespace srd
