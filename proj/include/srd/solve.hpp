#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "srd/common.hpp"

namespace srd {

struct ScanOptions {
  int grid_points = 2000;
  double rho_min = 1e-8;
  double rho_max_floor = 8.0;  // initial upper end is max(rho_max_floor, omega_span * omega)
  double omega_span = 40.0;
  int bisection_steps = 80;
  double extension_factor = 8.0;
  double rho_ceiling = 1e15;  // give up extending beyond this
};

struct ImplicitSolveReport {
  double rho_lower = 0.0;
  int crossings_found = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;
  bool range_exceeded = false;
  std::string warning;
};

/// Largest rho at which the defining inequality gap(rho) >= 0 still fails.
///
/// `gap` is LHS - RHS of a necessary condition: every rho with gap < 0 is not
/// achievable, and achievability is monotone in rho, so the supremum of the
/// failing set is a lower bound. The gap is scanned on a log grid; when it is
/// still negative at the top the range is extended geometrically. The last
/// negative-to-nonnegative crossing is refined by bisection. Assumes
/// gap(0+) < 0.
template <class Gap>
ImplicitSolveReport solve_largest_crossing(Gap&& gap, double omega, const ScanOptions& opt = {}) {
  ImplicitSolveReport rep;
  const double lo = opt.rho_min;
  double hi = std::max(opt.rho_max_floor, opt.omega_span * omega);
  const int n = std::max(opt.grid_points, 2);
  std::vector<double> grid(n);
  std::vector<double> vals(n);

  auto fill = [&](double from, double to) {
    const double ratio = std::log(to / from) / (n - 1);
    for (int i = 0; i < n; ++i) {
      grid[i] = i == n - 1 ? to : from * std::exp(ratio * i);
      vals[i] = gap(grid[i]);
    }
  };
  fill(lo, hi);
  int extensions = 0;
  while (vals[n - 1] < 0.0) {
    // Still violated at the top: continue on [hi, 8 hi] only, keeping the
    // crossings already counted.
    if (extensions == 0) {
      for (int i = 1; i < n; ++i)
        if (vals[i - 1] < 0.0 && vals[i] >= 0.0) ++rep.crossings_found;
      if (vals[0] >= 0.0) ++rep.crossings_found;
    }
    if (hi * opt.extension_factor > opt.rho_ceiling) {
      rep.rho_lower = hi;
      rep.bracket_lo = hi;
      rep.bracket_hi = std::numeric_limits<double>::infinity();
      rep.residual = vals[n - 1];
      rep.range_exceeded = true;
      rep.warning = "inequality still violated at the scan ceiling";
      return rep;
    }
    const double next = hi * opt.extension_factor;
    fill(hi, next);
    hi = next;
    ++extensions;
  }

  int last_negative = -1;
  bool prev_negative = true;  // gap(0+) < 0, or the segment start when extended
  for (int i = 0; i < n; ++i) {
    const bool negative = vals[i] < 0.0;
    if (prev_negative && !negative) ++rep.crossings_found;
    if (negative) last_negative = i;
    prev_negative = negative;
  }
  if (rep.crossings_found > 1)
    rep.warning = "multiple crossings; largest crossing taken";

  double a = last_negative >= 0 ? grid[last_negative] : (extensions > 0 ? grid[0] : 0.0);
  double b = grid[last_negative + 1];
  double gb = vals[last_negative + 1];
  for (int it = 0; it < opt.bisection_steps; ++it) {
    const double mid = a > 0.0 ? 0.5 * (a + b) : 0.5 * b;
    if (!(mid > a && mid < b)) break;
    const double gm = gap(mid);
    if (gm < 0.0) {
      a = mid;
    } else {
      b = mid;
      gb = gm;
    }
  }
  rep.rho_lower = b;
  rep.bracket_lo = a;
  rep.bracket_hi = b;
  rep.residual = gb;
  return rep;
}

/// Golden-section search for a maximum of f on [a, b]; returns the argmax.
template <class F>
double golden_section_max(F&& f, double a, double b, double rel_tol = 1e-6) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > rel_tol * std::max(std::abs(a), std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace srd
