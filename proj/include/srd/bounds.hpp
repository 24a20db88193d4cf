#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srd/common.hpp"
#include "srd/distributions.hpp"
#include "srd/parallel.hpp"
#include "srd/ratefun.hpp"
#include "srd/solve.hpp"

namespace srd {

enum class BoundId {
  T1_noiseless,
  P2_noiseless_iid,
  T3_noiseless_iid_F,
  C1_test,
  P3_general,
  T2_genie,
  P4_iid,
  P5_iid_gaussian,
  P6_iid_entropy,
  T4_iid_genie,
  S_cor_thm2,
  S_noiseless_simple,
  P7_shape,
  P8_shape,
};

inline constexpr BoundId all_bounds[] = {
    BoundId::T1_noiseless,  BoundId::P2_noiseless_iid, BoundId::T3_noiseless_iid_F,
    BoundId::C1_test,       BoundId::P3_general,       BoundId::T2_genie,
    BoundId::P4_iid,        BoundId::P5_iid_gaussian,  BoundId::P6_iid_entropy,
    BoundId::T4_iid_genie,  BoundId::S_cor_thm2,       BoundId::S_noiseless_simple,
    BoundId::P7_shape,      BoundId::P8_shape,
};

inline const char* to_string(BoundId id) {
  switch (id) {
    case BoundId::T1_noiseless: return "t1";
    case BoundId::P2_noiseless_iid: return "p2";
    case BoundId::T3_noiseless_iid_F: return "t3";
    case BoundId::C1_test: return "c1";
    case BoundId::P3_general: return "p3";
    case BoundId::T2_genie: return "t2";
    case BoundId::P4_iid: return "p4";
    case BoundId::P5_iid_gaussian: return "p5";
    case BoundId::P6_iid_entropy: return "p6";
    case BoundId::T4_iid_genie: return "t4";
    case BoundId::S_cor_thm2: return "s_simple_noisy";
    case BoundId::S_noiseless_simple: return "s_simple_noiseless";
    case BoundId::P7_shape: return "p7";
    case BoundId::P8_shape: return "p8";
  }
  return "?";
}

inline std::optional<BoundId> parse_bound(std::string_view name) {
  for (BoundId id : all_bounds)
    if (name == to_string(id)) return id;
  return std::nullopt;
}

enum class MatrixClass { any, iid };

// ---------------------------------------------------------------- noiseless

inline double t1_noiseless(double omega, double alpha) {
  detail::require(omega > 0.0 && omega <= 0.5, "t1_noiseless: omega must lie in (0, 1/2]");
  detail::require(alpha >= 0.0 && alpha <= 1.0, "t1_noiseless: alpha must lie in [0,1]");
  if (alpha >= 1.0 - omega) return 0.0;
  return omega - omega / (1.0 - omega) * alpha;
}

inline double p2_noiseless_iid(double omega, double alpha) {
  detail::require(omega > 0.0 && omega <= 0.5, "p2_noiseless_iid: omega must lie in (0, 1/2]");
  detail::require(alpha >= 0.0 && alpha <= 1.0, "p2_noiseless_iid: alpha must lie in [0,1]");
  return alpha >= 1.0 - omega ? 0.0 : omega;
}

/// Corollary test: when it holds, the iid noiseless threshold is omega itself.
inline bool c1_condition(const SourceParams& src, double alpha) {
  if (src.theta <= 0.0) return false;
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return false;
  return src.theta > delta(src.omega) * std::exp(-2.0 * r / src.omega);
}

inline double noiseless_simple(const SourceParams& src, double alpha) {
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0 || src.theta <= 0.0) return 0.0;
  return std::min(src.omega, 2.0 * r / (1.0 + std::log(1.0 / src.theta)));
}

struct NoiselessResult {
  double rho = 0.0;
  double simplified = 0.0;
  bool corollary_condition = false;
  std::string diagnostic;
};

/// Largest rho < omega at which the noiseless non-achievability condition
/// (rho/2) log(Delta(rho) / (theta Delta(rho/omega))) < R(omega, alpha) holds.
inline NoiselessResult t3_noiseless_iid(const SourceParams& src, double alpha) {
  NoiselessResult out;
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return out;
  if (src.theta <= 0.0) {
    out.diagnostic = "law has no density: one sample suffices in the noiseless setting";
    return out;
  }
  out.simplified = noiseless_simple(src, alpha);
  out.corollary_condition = c1_condition(src, alpha);
  if (out.corollary_condition) {
    out.rho = src.omega;
    return out;
  }
  const double omega = src.omega;
  const double log_theta = std::log(src.theta);
  auto gap = [&](double rho) {
    const double f = 0.5 * rho * (std::log(delta(rho)) - log_theta - std::log(delta(rho / omega)));
    return f - r;
  };
  ScanOptions opt;
  opt.rho_min = 1e-8 * omega;
  opt.rho_max_floor = omega * (1.0 - 1e-12);
  opt.omega_span = 0.0;
  opt.rho_ceiling = omega;
  const auto rep = solve_largest_crossing(gap, omega, opt);
  out.rho = rep.rho_lower;
  out.diagnostic = rep.warning;
  return out;
}

// ---------------------------------------------------------------- any matrix

inline double p3_general(const SourceParams& src, double alpha) {
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return 0.0;
  if (!(src.variance > 0.0)) throw domain_error("p3_general: V(omega, F) must be > 0");
  return 2.0 * r / std::log1p(src.variance);
}

struct GenieResult {
  double rho = 0.0;
  double beta_star = 1.0;
};

namespace detail {

struct BetaSlice {
  double c;          // 1 - (1 - beta) omega
  double omega_eff;  // beta omega / c
  double variance;   // V(beta omega, F_beta)
  double entropy_power;
};

inline BetaSlice beta_slice(const SourceParams& src, double beta) {
  const TruncationResult t = truncate(src.dist, beta);
  const double bo = beta * src.omega;
  const double c = 1.0 - (1.0 - beta) * src.omega;
  return {c, bo / c, variance_functional(bo, t.mean, t.variance),
          entropy_power_functional(bo, t.diff_entropy)};
}

// Grid over [alpha, 1] log-spaced in beta - alpha, best point refined by
// golden section between its neighbours. Returns (argmax, max).
template <class Objective>
std::pair<double, double> maximize_over_beta(Objective&& f, double alpha, int points = 200) {
  std::vector<double> betas(points);
  std::vector<double> vals(points);
  const double s_min = 1e-6;
  for (int i = 0; i < points; ++i) {
    const double s = i == points - 1 ? 1.0 : s_min * std::pow(1.0 / s_min, double(i) / (points - 1));
    betas[i] = i == points - 1 ? 1.0 : alpha + (1.0 - alpha) * s;
    vals[i] = f(betas[i]);
  }
  const int best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  double arg = betas[best];
  double val = vals[best];
  const double a = betas[std::max(best - 1, 0)];
  const double b = betas[std::min(best + 1, points - 1)];
  if (b > a) {
    const double x = golden_section_max(f, a, b, 1e-6);
    const double fx = f(x);
    if (fx > val) {
      arg = x;
      val = fx;
    }
  }
  return {arg, val};
}

}  // namespace detail

/// Genie-aided bound for arbitrary matrices, maximized over the fraction beta
/// of smallest nonzero entries withheld from the genie.
inline GenieResult t2_genie(const SourceParams& src, double alpha) {
  if (rate_R(src.omega, alpha) == 0.0) return {};
  if (!(alpha > 0.0)) throw domain_error("t2_genie: alpha must be > 0");
  auto objective = [&](double beta) {
    if (beta <= alpha) return 0.0;
    const auto s = detail::beta_slice(src, std::min(beta, 1.0));
    if (!(s.variance > 0.0)) return 0.0;
    return 2.0 * s.c * rate_R(s.omega_eff, alpha / beta) / std::log1p(s.variance);
  };
  const auto [beta, value] = detail::maximize_over_beta(objective, alpha);
  return {value, beta};
}

// ---------------------------------------------------------------- iid matrices

inline ImplicitSolveReport p4_iid(const SourceParams& src, double alpha) {
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return {};
  if (!(src.variance > 0.0)) throw domain_error("p4_iid: V(omega, F) must be > 0");
  const double v = src.variance;
  return solve_largest_crossing([&](double rho) { return info_G(rho, v) - r; }, src.omega);
}

inline ImplicitSolveReport p5_gaussian(const SourceParams& src, double alpha) {
  const auto* g = src.dist.get_if<Gaussian>();
  if (!g) throw domain_error("p5_gaussian: requires a Gaussian law");
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return {};
  const double v = src.variance;
  const double omega = src.omega;
  const double inner = omega * g->variance;
  return solve_largest_crossing(
      [&](double rho) { return info_G(rho, v) - r - omega * info_G(rho / omega, inner); }, omega);
}

/// Closed-form relaxation of the entropy-power bound, always below it.
inline double s_cor_thm2(const SourceParams& src, double alpha) {
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return 0.0;
  const double l = std::log1p(src.variance);
  const double c = std::log1p(src.entropy_power / e);
  const double below = 2.0 * r / (l - c);
  if (below <= src.omega) return below;
  return (2.0 * r + src.omega * c) / l;
}

inline ImplicitSolveReport p6_entropy(const SourceParams& src, double alpha) {
  if (!(src.entropy_power > 0.0))
    throw domain_error("p6_entropy: law has no density (V_h = 0); use p4_iid");
  const double r = rate_R(src.omega, alpha);
  if (r == 0.0) return {};
  const double v = src.variance;
  const double vh = src.entropy_power;
  const double omega = src.omega;
  auto rep = solve_largest_crossing(
      [&](double rho) { return info_G(rho, v) - r - omega * info_V(rho / omega, vh); }, omega);
  const double simple = s_cor_thm2(src, alpha);
  if (simple > rep.rho_lower * (1.0 + 1e-9) + 1e-15) {
    if (!rep.warning.empty()) rep.warning += "; ";
    rep.warning += "closed-form relaxation exceeds the solved bound";
  }
  return rep;
}

struct GenieSolveResult {
  ImplicitSolveReport report;
  double beta_star = 1.0;
  std::vector<std::string> log;
};

/// Genie-aided bound for iid matrices. Laws without a density enter with
/// V_h = 0, which drops the entropy term.
inline GenieSolveResult t4_genie_iid(const SourceParams& src, double alpha) {
  GenieSolveResult out;
  if (rate_R(src.omega, alpha) == 0.0) return out;
  if (!(alpha > 0.0)) throw domain_error("t4_genie_iid: alpha must be > 0");
  auto solve_at = [&](double beta) -> std::optional<ImplicitSolveReport> {
    if (beta <= alpha) return ImplicitSolveReport{};
    detail::BetaSlice s{};
    try {
      s = detail::beta_slice(src, std::min(beta, 1.0));
    } catch (const std::exception& ex) {
      out.log.push_back("beta=" + std::to_string(beta) + " skipped: " + ex.what());
      return std::nullopt;
    }
    if (!(s.variance > 0.0)) return ImplicitSolveReport{};
    const double r = rate_R(s.omega_eff, alpha / beta);
    if (r == 0.0) return ImplicitSolveReport{};
    const double bo = beta * src.omega;
    return solve_largest_crossing(
        [&](double rho) {
          return info_G(rho / s.c, s.variance) - r - s.omega_eff * info_V(rho / bo, s.entropy_power);
        },
        src.omega);
  };
  auto objective = [&](double beta) {
    const auto rep = solve_at(beta);
    return rep ? rep->rho_lower : 0.0;
  };
  const auto [beta, value] = detail::maximize_over_beta(objective, alpha);
  out.beta_star = beta;
  if (auto rep = solve_at(beta)) out.report = *rep;
  out.report.rho_lower = value;
  return out;
}

// ---------------------------------------------------------------- shapes

inline double p7_shape(const SourceParams& src, double alpha, double power) {
  if (!(alpha > 0.0 && alpha < 0.25)) throw domain_error("p7_shape: alpha must lie in (0, 1/4)");
  detail::require(power > 0.0, "p7_shape: power must be > 0");
  const double l = decay_rate(src.dist).L;
  const double ao = alpha * src.omega;
  return ao * std::log(1.0 / ao) / std::log1p(std::pow(alpha, 2.0 * l + 1.0) * power);
}

struct ShapeResult {
  double value = 0.0;
  bool condition_met = false;
};

inline ShapeResult p8_shape(const SourceParams& src, double alpha, double power) {
  if (!(alpha > 0.0 && alpha < 0.25)) throw domain_error("p8_shape: alpha must lie in (0, 1/4)");
  detail::require(power > 0.0, "p8_shape: power must be > 0");
  const double omega = src.omega;
  ShapeResult out;
  out.value = omega + omega * std::log(1.0 / omega) / std::log1p(power);
  out.condition_met = src.theta > std::exp(1.0 - rate_R(omega, alpha) / omega);
  return out;
}

// ---------------------------------------------------------------- dispatch

struct BoundValue {
  double rho = 0.0;
  std::optional<double> beta_star;
  std::string diagnostic;
};

/// Uniform entry point: the rho-lower-bound value of `id` at (src, alpha).
inline BoundValue evaluate_bound(BoundId id, const SourceParams& src, double alpha) {
  switch (id) {
    case BoundId::T1_noiseless: return {t1_noiseless(src.omega, alpha), std::nullopt, {}};
    case BoundId::P2_noiseless_iid: return {p2_noiseless_iid(src.omega, alpha), std::nullopt, {}};
    case BoundId::T3_noiseless_iid_F: {
      const auto r = t3_noiseless_iid(src, alpha);
      return {r.rho, std::nullopt, r.diagnostic};
    }
    case BoundId::C1_test:
      return {c1_condition(src, alpha) ? src.omega : 0.0, std::nullopt, {}};
    case BoundId::P3_general: return {p3_general(src, alpha), std::nullopt, {}};
    case BoundId::T2_genie: {
      const auto r = t2_genie(src, alpha);
      return {r.rho, r.beta_star, {}};
    }
    case BoundId::P4_iid: {
      const auto r = p4_iid(src, alpha);
      return {r.rho_lower, std::nullopt, r.warning};
    }
    case BoundId::P5_iid_gaussian: {
      const auto r = p5_gaussian(src, alpha);
      return {r.rho_lower, std::nullopt, r.warning};
    }
    case BoundId::P6_iid_entropy: {
      const auto r = p6_entropy(src, alpha);
      return {r.rho_lower, std::nullopt, r.warning};
    }
    case BoundId::T4_iid_genie: {
      const auto r = t4_genie_iid(src, alpha);
      return {r.report.rho_lower, r.beta_star, r.report.warning};
    }
    case BoundId::S_cor_thm2:
      if (!(src.entropy_power > 0.0)) throw domain_error("s_cor_thm2: law has no density");
      return {s_cor_thm2(src, alpha), std::nullopt, {}};
    case BoundId::S_noiseless_simple: return {noiseless_simple(src, alpha), std::nullopt, {}};
    case BoundId::P7_shape: return {p7_shape(src, alpha, src.power), std::nullopt, {}};
    case BoundId::P8_shape: {
      const auto r = p8_shape(src, alpha, src.power);
      return {r.value, std::nullopt, r.condition_met ? "" : "theta condition not met"};
    }
  }
  return {};
}

/// Whether `id` can be evaluated for this source without a domain error.
inline bool bound_applicable(BoundId id, const SourceParams& src) {
  switch (id) {
    case BoundId::P5_iid_gaussian: return src.dist.kind() == DistributionKind::gaussian;
    case BoundId::P6_iid_entropy:
    case BoundId::S_cor_thm2: return src.entropy_power > 0.0;
    case BoundId::T3_noiseless_iid_F: return src.theta > 0.0;
    default: return true;
  }
}

struct BestLower {
  double value = 0.0;
  BoundId winner = BoundId::P3_general;
};

inline BestLower best_lower(const SourceParams& src, double alpha, MatrixClass cls) {
  std::vector<BoundId> ids{BoundId::P3_general, BoundId::T2_genie};
  if (cls == MatrixClass::iid) {
    ids.insert(ids.end(), {BoundId::P4_iid, BoundId::P5_iid_gaussian, BoundId::P6_iid_entropy,
                           BoundId::T4_iid_genie, BoundId::T3_noiseless_iid_F});
  }
  BestLower best;
  bool first = true;
  for (BoundId id : ids) {
    if (!bound_applicable(id, src)) continue;
    const double v = evaluate_bound(id, src, alpha).rho;
    if (first || v > best.value) {
      best = {v, id};
      first = false;
    }
  }
  return best;
}

// ---------------------------------------------------------------- curves

enum class CurveAxis { alpha_vs_rho, rho_vs_snr };

struct CurvePoint {
  double x;
  double y;
  std::optional<double> beta_star;
};

struct BoundCurve {
  BoundId bound;
  SourceParams source;
  CurveAxis axis;
  std::vector<CurvePoint> points;
  int grid_size = 0;
  double tolerance = 0.0;
  std::vector<std::string> diagnostics;
};

/// For each rho, the smallest alpha whose bound value does not exceed rho
/// (bisection on alpha). Points where the bound is seen to be non-monotone in
/// alpha are dropped with a diagnostic.
inline BoundCurve alpha_curve(const SourceParams& src, BoundId bound,
                              const std::vector<double>& rho_grid) {
  if (bound == BoundId::P8_shape)
    throw domain_error("alpha_curve: p8 does not depend on alpha and cannot be inverted");
  BoundCurve curve{bound, src, CurveAxis::alpha_vs_rho, {}, static_cast<int>(rho_grid.size()),
                   1e-12, {}};
  const double a_min = 1e-6;
  const double a_max = bound == BoundId::P7_shape ? 0.25 * (1.0 - 1e-9) : 1.0 - src.omega;

  struct Slot {
    std::optional<CurvePoint> point;
    std::string diagnostic;
  };
  std::vector<Slot> slots(rho_grid.size());
  parallel_for(rho_grid.size(), [&](std::size_t i) {
    const double rho = rho_grid[i];
    std::vector<std::pair<double, double>> seen;
    auto value = [&](double a) {
      const double v = evaluate_bound(bound, src, a).rho;
      seen.emplace_back(a, v);
      return v;
    };
    double lo = a_min;
    double hi = a_max;
    if (value(lo) <= rho) {
      hi = lo;
    } else if (value(hi) > rho) {
      slots[i].diagnostic = "rho=" + std::to_string(rho) + ": bound exceeds rho on the whole alpha range";
      return;
    } else {
      for (int it = 0; it < 100 && hi - lo > curve.tolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) <= rho) hi = mid; else lo = mid;
      }
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t k = 1; k < seen.size(); ++k) {
      if (seen[k].second > seen[k - 1].second * (1.0 + 1e-9) + 1e-12) {
        slots[i].diagnostic = "rho=" + std::to_string(rho) + ": bound not monotone in alpha";
        return;
      }
    }
    slots[i].point = CurvePoint{rho, hi, std::nullopt};
  });
  for (auto& s : slots) {
    if (s.point) curve.points.push_back(*s.point);
    if (!s.diagnostic.empty()) curve.diagnostics.push_back(s.diagnostic);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  return curve;
}

/// Bound value versus SNR (dB); the law's shape is kept and rescaled so that
/// the source power equals 10^(snr/10).
inline BoundCurve snr_curve(const DistributionSpec& shape, double omega, double alpha, BoundId bound,
                            const std::vector<double>& snr_db) {
  const SourceParams base = source_functionals(omega, shape);
  BoundCurve curve{bound, base, CurveAxis::rho_vs_snr, {}, static_cast<int>(snr_db.size()), 0.0, {}};
  std::vector<std::optional<CurvePoint>> pts(snr_db.size());
  std::vector<std::string> diag(snr_db.size());
  parallel_for(snr_db.size(), [&](std::size_t i) {
    const double p = std::pow(10.0, snr_db[i] / 10.0);
    try {
      const SourceParams src = source_functionals(omega, scale_to_power(shape, omega, p));
      const BoundValue v = evaluate_bound(bound, src, alpha);
      pts[i] = CurvePoint{snr_db[i], v.rho, v.beta_star};
    } catch (const domain_error& ex) {
      diag[i] = "snr=" + std::to_string(snr_db[i]) + ": " + ex.what();
    }
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i]) curve.points.push_back(*pts[i]);
    if (!diag[i].empty()) curve.diagnostics.push_back(diag[i]);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.x < b.x; });
  return curve;
}

}  // namespace srd
