#pragma once

// Verification oracles for truncate(): the truncated law is rebuilt from the
// density (quadrature) or from raw samples (Monte-Carlo). Neither path calls
// the closed forms or the Gaussian quantile routines in special.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "srd/distributions.hpp"

namespace srd {

enum class OracleMethod { quadrature, montecarlo };

struct OracleResult {
  TruncationResult value;
  double mean_error = 0.0;      // quadrature error bound, or MC standard error
  double variance_error = 0.0;
  double entropy_error = 0.0;   // quadrature only
  std::size_t budget_used = 0;  // samples (MC)
};

namespace detail {

struct Density {
  std::function<double(double)> pdf;
  std::function<double(double)> log_pdf;
  // The law restricted to |x| <= t lives on the union of these intervals.
  std::function<std::vector<std::pair<double, double>>(double)> region;
  double scale;  // a magnitude beyond which essentially no mass remains
};

inline Density density_of(const DistributionSpec& dist) {
  Density d;
  if (const auto* g = dist.get_if<Gaussian>()) {
    const double mu = g->mean;
    const double s = std::sqrt(g->variance);
    d.log_pdf = [=](double x) {
      const double z = (x - mu) / s;
      return -0.5 * z * z - std::log(s * std::sqrt(2.0 * pi));
    };
    d.region = [](double t) { return std::vector<std::pair<double, double>>{{-t, t}}; };
    d.scale = std::abs(mu) + 40.0 * s;
  } else if (const auto* u = dist.get_if<Uniform>()) {
    const double half = std::sqrt(3.0 * u->variance);
    const double a = u->mean - half;
    const double b = u->mean + half;
    d.log_pdf = [=](double) { return -std::log(b - a); };
    d.region = [=](double t) {
      const double lo = std::max(a, -t);
      const double hi = std::min(b, t);
      return hi > lo ? std::vector<std::pair<double, double>>{{lo, hi}}
                     : std::vector<std::pair<double, double>>{};
    };
    d.scale = b;
  } else if (const auto* sg = dist.get_if<SlicedGaussian>()) {
    const double b = sg->floor;
    const double s = std::sqrt(sg->slice_variance);
    d.log_pdf = [=](double x) {
      const double z = (std::abs(x) - b) / s;
      return -0.5 * z * z - std::log(s * std::sqrt(2.0 * pi));
    };
    d.region = [=](double t) {
      if (t <= b) return std::vector<std::pair<double, double>>{};
      return std::vector<std::pair<double, double>>{{-t, -b}, {b, t}};
    };
    d.scale = b + 40.0 * s;
  } else {
    throw domain_error("truncate_oracle: quadrature requires a law with a density");
  }
  auto lp = d.log_pdf;
  d.pdf = [lp](double x) { return std::exp(lp(x)); };
  return d;
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double* error) {
  // Integrate on [-1, 1]: the error estimate misbehaves on very short raw intervals.
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double u) { return f(mid + half * u); }, -1.0, 1.0, 12, 1e-13, &err);
  *error += half * err;
  return half * v;
}

inline double integrate_region(const Density& d, double t, const std::function<double(double)>& f,
                               double* error) {
  double total = 0.0;
  for (auto [a, b] : d.region(t)) total += integrate(f, a, b, error);
  return total;
}

}  // namespace detail

/// Rebuilds truncate(dist, beta) numerically. Quadrature: the cutoff is found
/// by bisection on the integrated mass, then mean, variance and entropy are
/// integrated over the kept region. Monte-Carlo: `budget` samples are drawn
/// and the smallest-magnitude ceil(beta*budget) are kept.
inline OracleResult truncate_oracle(const DistributionSpec& dist, double beta, OracleMethod method,
                                    std::size_t budget, std::uint64_t seed = 1) {
  if (!(beta > 0.0 && beta <= 1.0)) throw domain_error("truncate_oracle: beta must lie in (0,1]");
  OracleResult out;

  if (method == OracleMethod::quadrature) {
    const detail::Density d = detail::density_of(dist);
    double scratch = 0.0;
    auto mass = [&](double t) { return detail::integrate_region(d, t, d.pdf, &scratch); };
    double lo = 0.0;
    double hi = d.scale;
    double t = hi;
    if (beta < 1.0) {
      for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) < beta) lo = mid; else hi = mid;
      }
      t = 0.5 * (lo + hi);
    }
    double err_mass = 0.0;
    double err_m1 = 0.0;
    double err_m2 = 0.0;
    double err_h = 0.0;
    const double z = detail::integrate_region(d, t, d.pdf, &err_mass);
    const double m1 =
        detail::integrate_region(d, t, [&](double x) { return x * d.pdf(x); }, &err_m1) / z;
    const double var =
        detail::integrate_region(d, t, [&](double x) { return (x - m1) * (x - m1) * d.pdf(x); }, &err_m2) / z;
    const double m2 = var + m1 * m1;
    const double flogf = detail::integrate_region(
        d, t, [&](double x) { return d.pdf(x) * d.log_pdf(x); }, &err_h);
    out.value.beta = beta;
    out.value.threshold = t;
    out.value.mean = m1;
    out.value.variance = var;
    out.value.diff_entropy = -flogf / z + std::log(z);
    out.mean_error = (err_m1 + std::abs(m1) * err_mass) / z;
    out.variance_error = (err_m2 + var * err_mass) / z;
    out.entropy_error = (err_h + err_mass) / z;
    if (out.variance_error > 1e-9 * std::max(1.0, m2))
      throw accuracy_error("truncate_oracle: quadrature did not converge", out.variance_error);
    return out;
  }

  detail::require(budget >= 16, "truncate_oracle: Monte-Carlo budget must be >= 16");
  std::mt19937_64 rng(seed);
  std::vector<double> xs(budget);
  for (auto& x : xs) x = draw_value(dist, rng);
  const std::size_t keep =
      std::min(budget, static_cast<std::size_t>(std::ceil(beta * static_cast<double>(budget))));
  std::sort(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double threshold = std::abs(xs[keep - 1]);
  const double kk = static_cast<double>(keep);
  const double nn = static_cast<double>(budget);
  const double bh = kk / nn;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    s1 += xs[i];
    s2 += xs[i] * xs[i];
  }
  const double mean = s1 / kk;
  const double m2 = s2 / kk;
  double c2 = 0.0;
  for (std::size_t i = 0; i < keep; ++i) c2 += (xs[i] - mean) * (xs[i] - mean);
  const double var = c2 / kk;

  // Standard errors from the influence function of a quantile-trimmed mean:
  // the cutoff is itself estimated, which adds E[g(X) | |X| = t] (beta - 1{kept})
  // per sample. The conditional values are averaged over a window of samples
  // around the cutoff.
  double edge_x = 0.0;
  double edge_x2 = 0.0;
  if (keep < budget) {
    const std::size_t half = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(nn)) / 2);
    const std::size_t lo = keep > half ? keep - half : 0;
    const std::size_t hi = std::min(budget, keep + half);
    for (std::size_t i = lo; i < hi; ++i) {
      edge_x += xs[i];
      edge_x2 += xs[i] * xs[i];
    }
    edge_x /= static_cast<double>(hi - lo);
    edge_x2 /= static_cast<double>(hi - lo);
  }
  double sum_pm = 0.0;
  double sum_pv = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    const double in = i < keep ? 1.0 : 0.0;
    const double x = xs[i];
    const double psi_m = (x * in - bh * mean + edge_x * (bh - in)) / bh;
    const double psi_m2 = (x * x * in - bh * m2 + edge_x2 * (bh - in)) / bh;
    const double psi_v = psi_m2 - 2.0 * mean * psi_m;
    sum_pm += psi_m * psi_m;
    sum_pv += psi_v * psi_v;
  }
  out.value = {beta, threshold, mean, var, std::nullopt};
  out.mean_error = std::sqrt(sum_pm / nn / nn);
  out.variance_error = std::sqrt(sum_pv / nn / nn);
  out.budget_used = budget;
  return out;
}

}  // namespace srd
