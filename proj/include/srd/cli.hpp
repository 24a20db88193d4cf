#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "srd/bounds.hpp"
#include "srd/distributions.hpp"
#include "srd/io.hpp"
#include "srd/montecarlo.hpp"
#include "srd/ratefun.hpp"
#include "srd/simulate.hpp"
#include "srd/truncation_oracle.hpp"

#ifndef SRD_VERSION
#define SRD_VERSION "0.1.0"
#endif

namespace srd {

enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_verify_failed = 3, exit_budget = 4 };

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cli {

using Config = std::vector<std::pair<std::string, std::string>>;

struct ShapeOptions {
  std::string dist = "gaussian";
  double mu2_over_sigma2 = 0.0;
  double eta = 0.2;
  CLI::Option* mass = nullptr;
  double mass_value = 0.0;

  void add(CLI::App* app) {
    app->add_option("--dist", dist, "Nonzero-value law")
        ->check(CLI::IsMember({"gaussian", "uniform", "pointmass", "sliced"}))
        ->capture_default_str();
    app->add_option("--mu2-over-sigma2", mu2_over_sigma2, "Squared mean over variance (gaussian, uniform)")
        ->capture_default_str();
    app->add_option("--eta", eta, "Floor parameter: b^2 = eta * power (pointmass, sliced)")
        ->capture_default_str();
    mass = app->add_option("--mass", mass_value, "Outer-atom mass of a finite point-mass law (default: limit)");
  }

  // Unit-power shape; callers rescale to the requested SNR.
  DistributionSpec shape() const {
    if (!(mu2_over_sigma2 >= 0.0)) throw usage_error("--mu2-over-sigma2 must be >= 0");
    if (dist == "gaussian") {
      const double r = mu2_over_sigma2;
      return DistributionSpec::gaussian(std::sqrt(r / (1.0 + r)), 1.0 / (1.0 + r));
    }
    if (dist == "uniform") {
      const double r = mu2_over_sigma2;
      return DistributionSpec::uniform(std::sqrt(r / (1.0 + r)), 1.0 / (1.0 + r));
    }
    if (!(eta > 0.0 && eta <= 1.0)) throw usage_error("--eta must lie in (0, 1] for " + dist);
    if (dist == "pointmass") {
      if (mass->count() > 0) return DistributionSpec::point_mass(eta, 1.0, mass_value);
      return DistributionSpec::point_mass_limit(eta, 1.0);
    }
    if (!(eta < 1.0)) throw usage_error("--eta must be < 1 for the sliced law");
    return DistributionSpec::sliced_gaussian_with_power(std::sqrt(eta), 1.0);
  }

  void record(Config& c) const {
    c.emplace_back("dist", dist);
    c.emplace_back("mu2-over-sigma2", format_number(mu2_over_sigma2));
    c.emplace_back("eta", format_number(eta));
    if (mass->count() > 0) c.emplace_back("mass", format_number(mass_value));
  }
};

// Writes CSV through `emit` either to `path` (plus a manifest next to it) or
// to `out`.
inline void deliver(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& emit,
                    const std::string& command, const Config& config, std::uint64_t seed) {
  if (path.empty()) {
    emit(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw usage_error("cannot open output file " + path);
  emit(f);
  std::ofstream mf(path + ".manifest", std::ios::binary);
  if (!mf) throw usage_error("cannot open manifest file " + path + ".manifest");
  write_manifest(mf, make_manifest(command, config, seed, SRD_VERSION));
}

inline void write_svg_file(const std::string& path, const std::vector<SvgSeries>& series,
                           const std::string& xl, const std::string& yl, bool log_x, bool log_y) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw usage_error("cannot open svg file " + path);
  write_svg(f, series, xl, yl, log_x, log_y);
}

// ------------------------------------------------------------------ bounds

struct BoundsCommand {
  ShapeOptions shape;
  double omega = 1e-4;
  double snr_db = 20.0;
  std::string bounds = "p3,t2,p4,p6,t4";
  std::string grid = "log:0.001:0.5:30";
  std::string over = "alpha";
  std::string out_path;
  std::string svg_path;

  void add(CLI::App* app) {
    shape.add(app);
    app->add_option("--omega", omega, "Sparsity rate")->capture_default_str();
    app->add_option("--snr-db", snr_db, "Source power P in dB")->capture_default_str();
    app->add_option("--bounds", bounds, "Comma-separated bound ids")->capture_default_str();
    app->add_option("--grid", grid, "Grid over the --over axis (lin:a:b:n, log:a:b:n or a,b,c)")
        ->capture_default_str();
    app->add_option("--over", over, "Grid axis: alpha (evaluate) or rho (invert)")
        ->check(CLI::IsMember({"alpha", "rho"}))
        ->capture_default_str();
    app->add_option("--out", out_path, "CSV output path (default: stdout)");
    app->add_option("--svg", svg_path, "Optional SVG plot path");
  }

  Config config() const {
    Config c;
    shape.record(c);
    c.emplace_back("omega", format_number(omega));
    c.emplace_back("snr-db", format_number(snr_db));
    c.emplace_back("bounds", bounds);
    c.emplace_back("grid", grid);
    c.emplace_back("over", over);
    return c;
  }

  int run(std::ostream& out, std::ostream& err) const {
    std::vector<BoundId> ids;
    for (const auto& name : split(bounds, ',')) {
      if (name.empty()) continue;
      const auto id = parse_bound(name);
      if (!id) throw usage_error("unknown bound id '" + name + "'");
      ids.push_back(*id);
    }
    if (ids.empty()) throw usage_error("--bounds: no bound selected");
    const SourceParams src =
        source_functionals(omega, scale_to_power(shape.shape(), omega, std::pow(10.0, snr_db / 10.0)));
    for (BoundId id : ids)
      if (!bound_applicable(id, src))
        throw usage_error(std::string("bound ") + to_string(id) + " does not apply to " + shape.dist);
    const std::vector<double> g = parse_grid(grid);

    struct Row {
      BoundId id;
      double rho;
      double alpha;
      std::optional<double> beta;
    };
    std::vector<Row> rows;
    std::vector<std::string> notes;
    for (BoundId id : ids) {
      if (over == "alpha") {
        std::vector<std::optional<Row>> slots(g.size());
        std::vector<std::string> diag(g.size());
        parallel_for(g.size(), [&](std::size_t i) {
          try {
            const BoundValue v = evaluate_bound(id, src, g[i]);
            slots[i] = Row{id, v.rho, g[i], v.beta_star};
          } catch (const domain_error& ex) {
            diag[i] = std::string(to_string(id)) + " alpha=" + format_number(g[i]) + ": " + ex.what();
          }
        });
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (slots[i]) rows.push_back(*slots[i]);
          if (!diag[i].empty()) notes.push_back(diag[i]);
        }
      } else {
        const BoundCurve curve = alpha_curve(src, id, g);
        std::vector<std::optional<double>> betas(curve.points.size());
        if (id == BoundId::T2_genie || id == BoundId::T4_iid_genie) {
          parallel_for(curve.points.size(), [&](std::size_t i) {
            betas[i] = evaluate_bound(id, src, curve.points[i].y).beta_star;
          });
        }
        for (std::size_t i = 0; i < curve.points.size(); ++i)
          rows.push_back({id, curve.points[i].x, curve.points[i].y, betas[i]});
        notes.insert(notes.end(), curve.diagnostics.begin(), curve.diagnostics.end());
      }
    }
    for (const auto& n : notes) err << "note: " << n << '\n';

    deliver(out_path, out, [&](std::ostream& os) {
      CsvWriter csv(os, {"bound", "rho", "alpha", "beta_star"});
      for (const auto& r : rows)
        csv.write({to_string(r.id), format_number(r.rho), format_number(r.alpha), format_optional(r.beta)});
    }, "bounds", config(), 0);

    std::vector<SvgSeries> series;
    for (BoundId id : ids) {
      SvgSeries s{to_string(id), {}};
      for (const auto& r : rows)
        if (r.id == id) s.points.emplace_back(r.rho, r.alpha);
      std::sort(s.points.begin(), s.points.end());
      series.push_back(std::move(s));
    }
    write_svg_file(svg_path, series, "sampling rate rho", "distortion alpha", true, false);
    return exit_ok;
  }
};

// ------------------------------------------------------------------ snr-curve

struct SnrCurvePoint {
  double snr_db;
  std::optional<BestLower> point_mass;
  std::optional<BestLower> sliced;
};

/// Lower bound for the class of laws with power gamma and |X|^2 >= eta gamma:
/// the larger of the bounds for two members of the class, the eps -> 0
/// point-mass law with b^2 = eta gamma and the sliced Gaussian with
/// b = sqrt(eta gamma). Members that do not exist for this eta are skipped.
inline SnrCurvePoint floor_class_bound(double omega, double alpha, double eta, double snr_db,
                                       MatrixClass cls) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw domain_error("eta must lie in [0, 1]");
  const double power = std::pow(10.0, snr_db / 10.0);
  const double gamma = power / omega;
  SnrCurvePoint p{snr_db, std::nullopt, std::nullopt};
  if (eta > 0.0) {
    const auto pm = source_functionals(omega, DistributionSpec::point_mass_limit(eta * gamma, gamma));
    p.point_mass = best_lower(pm, alpha, cls);
  }
  if (eta > 0.0 && eta < 1.0) {
    const auto sl =
        source_functionals(omega, DistributionSpec::sliced_gaussian_with_power(std::sqrt(eta * gamma), gamma));
    p.sliced = best_lower(sl, alpha, cls);
  }
  return p;
}

struct SnrCurveCommand {
  double omega = 1e-4;
  double alpha = 0.1;
  double eta = 0.2;
  std::string grid = "lin:-20:50:15";
  std::string matrix_class = "iid";
  std::string out_path;
  std::string svg_path;

  void add(CLI::App* app) {
    app->add_option("--omega", omega, "Sparsity rate")->capture_default_str();
    app->add_option("--alpha", alpha, "Target distortion")->capture_default_str();
    app->add_option("--eta", eta, "Floor parameter in [0,1]")->capture_default_str();
    app->add_option("--grid", grid, "SNR grid in dB")->capture_default_str();
    app->add_option("--matrix-class", matrix_class, "Sampling matrices: iid or any")
        ->check(CLI::IsMember({"iid", "any"}))
        ->capture_default_str();
    app->add_option("--out", out_path, "CSV output path (default: stdout)");
    app->add_option("--svg", svg_path, "Optional SVG plot path");
  }

  Config config() const {
    return {{"omega", format_number(omega)}, {"alpha", format_number(alpha)}, {"eta", format_number(eta)},
            {"grid", grid}, {"matrix-class", matrix_class}};
  }

  int run(std::ostream& out, std::ostream&) const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw usage_error("--eta must lie in [0, 1]");
    if (!(eta > 0.0)) throw usage_error("--eta = 0 leaves no candidate law with a positive floor");
    const std::vector<double> g = parse_grid(grid);
    const MatrixClass cls = matrix_class == "iid" ? MatrixClass::iid : MatrixClass::any;
    std::vector<SnrCurvePoint> pts(g.size());
    parallel_for(g.size(), [&](std::size_t i) { pts[i] = floor_class_bound(omega, alpha, eta, g[i], cls); });
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });

    deliver(out_path, out, [&](std::ostream& os) {
      CsvWriter csv(os, {"snr_db", "rho", "winner", "winner_bound", "rho_pointmass", "bound_pointmass",
                         "rho_sliced", "bound_sliced"});
      for (const auto& p : pts) {
        const bool pm_wins = p.point_mass && (!p.sliced || p.point_mass->value >= p.sliced->value);
        const BestLower& w = pm_wins ? *p.point_mass : *p.sliced;
        csv.write({format_number(p.snr_db), format_number(w.value), pm_wins ? "pointmass" : "sliced",
                   to_string(w.winner), p.point_mass ? format_number(p.point_mass->value) : "",
                   p.point_mass ? to_string(p.point_mass->winner) : "",
                   p.sliced ? format_number(p.sliced->value) : "", p.sliced ? to_string(p.sliced->winner) : ""});
      }
    }, "snr-curve", config(), 0);

    SvgSeries best{"max", {}}, pm{"pointmass", {}}, sl{"sliced", {}};
    for (const auto& p : pts) {
      double v = 0.0;
      if (p.point_mass) {
        pm.points.emplace_back(p.snr_db, p.point_mass->value);
        v = p.point_mass->value;
      }
      if (p.sliced) {
        sl.points.emplace_back(p.snr_db, p.sliced->value);
        v = std::max(v, p.sliced->value);
      }
      best.points.emplace_back(p.snr_db, v);
    }
    write_svg_file(svg_path, {best, pm, sl}, "SNR (dB)", "sampling rate rho", false, true);
    return exit_ok;
  }
};

// ------------------------------------------------------------------ verify

struct CheckRow {
  std::string suite;
  std::string check;
  double measured;
  double target;
  double gap;
  double tolerance;
  bool pass;
};

struct VerifyCommand {
  std::string suite = "all";
  CLI::Option* n_opt = nullptr;
  int n = 0;
  CLI::Option* k_opt = nullptr;
  int k = 0;
  double alpha = 0.5;
  CLI::Option* trials_opt = nullptr;
  int trials = 0;
  std::uint64_t seed = 1;
  std::string out_path;

  void add(CLI::App* app) {
    app->add_option("--suite", suite, "mp_logdet, det_power, covering, truncation, power_ratio, rank or all")
        ->check(CLI::IsMember({"all", "mp_logdet", "det_power", "covering", "truncation", "power_ratio", "rank"}))
        ->capture_default_str();
    n_opt = app->add_option("--n", n, "Dimension (suite default when omitted)");
    k_opt = app->add_option("--k", k, "Support size for the covering suite");
    app->add_option("--alpha", alpha, "Distortion for the covering suite")->capture_default_str();
    trials_opt = app->add_option("--trials", trials, "Monte-Carlo trials (suite default when omitted)");
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--out", out_path, "CSV output path (default: stdout)");
  }

  Config config() const {
    Config c{{"suite", suite}, {"alpha", format_number(alpha)}};
    if (n_opt->count()) c.emplace_back("n", std::to_string(n));
    if (k_opt->count()) c.emplace_back("k", std::to_string(k));
    if (trials_opt->count()) c.emplace_back("trials", std::to_string(trials));
    return c;
  }

  int dim(int fallback) const { return n_opt->count() ? n : fallback; }
  int reps(int fallback) const { return trials_opt->count() ? trials : fallback; }

  static CheckRow relative(std::string suite, std::string check, double measured, double target, double tol) {
    const double gap = std::abs(measured - target) / std::max(std::abs(target), 1e-12);
    return {std::move(suite), std::move(check), measured, target, gap, tol, gap <= tol};
  }
  static CheckRow absolute(std::string suite, std::string check, double measured, double target, double tol) {
    const double gap = std::abs(measured - target);
    return {std::move(suite), std::move(check), measured, target, gap, tol, gap <= tol};
  }

  void mp_logdet_suite(std::vector<CheckRow>& rows) const {
    for (double r : {0.5, 1.0, 2.0})
      for (double g : {1.0, 10.0, 100.0}) {
        const MCEstimate est = mp_logdet({dim(400), r, g, reps(50), seed});
        rows.push_back(relative("mp_logdet", "r=" + format_number(r) + " gamma=" + format_number(g), est.mean,
                                est.target, 0.02));
      }
  }

  void det_power_suite(std::vector<CheckRow>& rows) const {
    for (double r : {1.0, 2.0}) {
      const MCEstimate est = det_power({dim(400), r, 0.0, reps(20), seed});
      rows.push_back(relative("det_power", "r=" + format_number(r), est.mean, est.target, 0.03));
    }
    const MCConfig small{12, 1.0, 0.0, 5, seed};
    rows.push_back(relative("det_power", "log-domain vs direct determinant n=12", det_power(small).mean,
                            det_power_direct(small).mean, 1e-10));
  }

  void covering_suite(std::vector<CheckRow>& rows) const {
    const int nn = dim(10);
    const int kk = k_opt->count() ? k : 2;
    const CoveringBracket b = covering_bracket(nn, kk, alpha);
    // Ball size by brute force around the first support.
    std::vector<std::uint32_t> all;
    detail::lex_supports(nn, kk, 0, 0, all);
    std::size_t ball = 0;
    for (std::uint32_t s : all) ball += support_distortion(all.front(), s) <= alpha + 1e-12;
    const double nt = n_tilde(nn, kk, alpha).convert_to<double>();
    rows.push_back(absolute("covering", "ball size vs brute force", nt, static_cast<double>(ball), 0.0));
    const double lower = b.lower.convert_to<double>();
    const double expected_lower = std::ceil(static_cast<double>(all.size()) / static_cast<double>(ball));
    rows.push_back(absolute("covering", "lower bound", lower, expected_lower, 0.0));
    rows.push_back({"covering", "upper >= lower", static_cast<double>(b.upper), lower,
                    std::max(0.0, lower - static_cast<double>(b.upper)), 0.0,
                    static_cast<double>(b.upper) >= lower});
    const double rate = rate_R(static_cast<double>(kk) / nn, alpha);
    rows.push_back(absolute("covering", "log(lower)/n vs R", std::log(lower) / nn, rate, 0.15));
    rows.push_back(absolute("covering", "log(upper)/n vs R", std::log(static_cast<double>(b.upper)) / nn, rate,
                            0.15));
  }

  void truncation_suite(std::vector<CheckRow>& rows) const {
    const std::vector<double> betas{0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999};
    std::vector<std::pair<std::string, DistributionSpec>> laws;
    for (double v : {0.25, 1.0, 2.0, 10.0, 100.0})
      laws.emplace_back("gaussian var=" + format_number(v), DistributionSpec::gaussian(0.0, v));
    for (double r : {0.0, 1.0, 2.3, 4.0, 9.0})
      laws.emplace_back("uniform mu2/sigma2=" + format_number(r), DistributionSpec::uniform(std::sqrt(r), 1.0));
    for (double b : {0.1, 0.5, 1.0, 2.0, 5.0})
      laws.emplace_back("sliced b=" + format_number(b), DistributionSpec::sliced_gaussian(b, 1.0));
    const std::size_t mc_budget = static_cast<std::size_t>(reps(200000));

    std::vector<std::vector<CheckRow>> per(laws.size() * betas.size());
    parallel_for(per.size(), [&](std::size_t idx) {
      const auto& [name, law] = laws[idx / betas.size()];
      const double beta = betas[idx % betas.size()];
      const std::string tag = name + " beta=" + format_number(beta);
      const TruncationResult t = truncate(law, beta);
      const OracleResult q = truncate_oracle(law, beta, OracleMethod::quadrature, 0);
      const double scale = std::max(1.0, t.second_moment());
      auto& out = per[idx];
      out.push_back(absolute("truncation", tag + " mean (quadrature)", t.mean, q.value.mean, 1e-8 * scale));
      out.push_back(absolute("truncation", tag + " variance (quadrature)", t.variance, q.value.variance,
                             1e-8 * scale));
      out.push_back(absolute("truncation", tag + " entropy (quadrature)", *t.diff_entropy, *q.value.diff_entropy,
                             1e-8 * std::max(1.0, std::abs(*t.diff_entropy))));
      const OracleResult mc =
          truncate_oracle(law, beta, OracleMethod::montecarlo, mc_budget, derive_seed(seed, 6, idx));
      out.push_back(absolute("truncation", tag + " mean (Monte-Carlo)", t.mean, mc.value.mean, 3.0 * mc.mean_error));
      out.push_back(absolute("truncation", tag + " variance (Monte-Carlo)", t.variance, mc.value.variance,
                             3.0 * mc.variance_error));
    });
    for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());

    // Finite point-mass law against direct atom bookkeeping.
    for (double eps : {0.05, 0.2, 0.5}) {
      const double b2 = 0.3;
      const double gamma = 1.0;
      const double c2 = (gamma - (1.0 - eps) * b2) / eps;
      const auto law = DistributionSpec::point_mass(b2, gamma, eps);
      for (double beta : betas) {
        const double outer = std::max(0.0, beta - (1.0 - eps));
        const double inner = beta - outer;
        const double exact = (inner * b2 + outer * c2) / beta;
        const TruncationResult t = truncate(law, beta);
        rows.push_back(relative("truncation", "pointmass eps=" + format_number(eps) + " beta=" + format_number(beta) +
                                                  " second moment (atoms)",
                                t.second_moment(), exact, 1e-12));
      }
    }
  }

  void power_ratio_suite(std::vector<CheckRow>& rows) const {
    const auto g = power_ratio_scan(DistributionSpec::gaussian(0.0, 1.0), {1e-3, 1.0});
    rows.push_back(relative("power_ratio", "gaussian beta=1e-3 vs pi/6", g[0].second, pi / 6.0, 0.01));
    rows.push_back(relative("power_ratio", "gaussian beta=1", g[1].second, 1.0, 1e-12));
    const double b2 = 0.2;
    const auto pm = power_ratio_scan(DistributionSpec::point_mass(b2, 1.0, 0.1), {1e-3, 0.01, 0.1, 0.5, 0.9, 1.0});
    double lo = INFINITY;
    double hi = -INFINITY;
    for (auto [beta, ratio] : pm) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    rows.push_back({"power_ratio", "pointmass ratio >= b^2/gamma", lo, b2, std::max(0.0, b2 - lo), 1e-12,
                    lo >= b2 - 1e-12});
    rows.push_back({"power_ratio", "pointmass ratio <= 1", hi, 1.0, std::max(0.0, hi - 1.0), 1e-12,
                    hi <= 1.0 + 1e-12});
  }

  void rank_suite(std::vector<CheckRow>& rows) const {
    const int t = reps(2000);
    double prev = INFINITY;
    for (int nn : {8, 16, 32}) {
      const double p = rank_deficiency(nn, 0.5, EntryLaw::rademacher, t, seed);
      rows.push_back({"rank", "rademacher n=" + std::to_string(nn) + " below previous n", p,
                      std::isfinite(prev) ? prev : 1.0, 0.0, 0.0, p < prev});
      prev = p;
      const double pg = rank_deficiency(nn, 0.5, EntryLaw::gaussian, t, seed);
      rows.push_back(absolute("rank", "gaussian n=" + std::to_string(nn), pg, 0.0, 0.0));
    }
    rows.push_back(absolute("rank", "rademacher k=1", rank_deficiency(8, 0.125, EntryLaw::rademacher, t, seed), 0.0,
                            0.0));
  }

  int run(std::ostream& out, std::ostream& err) const {
    std::vector<CheckRow> rows;
    const bool all = suite == "all";
    if (all || suite == "truncation") truncation_suite(rows);
    if (all || suite == "power_ratio") power_ratio_suite(rows);
    if (all || suite == "covering") covering_suite(rows);
    if (all || suite == "rank") rank_suite(rows);
    if (all || suite == "det_power") det_power_suite(rows);
    if (all || suite == "mp_logdet") mp_logdet_suite(rows);
    int failures = 0;
    for (const auto& r : rows) failures += !r.pass;

    deliver(out_path, out, [&](std::ostream& os) {
      CsvWriter csv(os, {"suite", "check", "measured", "target", "gap", "tolerance", "pass"});
      for (const auto& r : rows)
        csv.write({r.suite, r.check, format_number(r.measured), format_number(r.target), format_number(r.gap),
                   format_number(r.tolerance), r.pass ? "true" : "false"});
    }, "verify", config(), seed);

    for (const auto& r : rows)
      if (!r.pass) err << "FAIL " << r.suite << ": " << r.check << " (gap " << format_number(r.gap) << " > "
                       << format_number(r.tolerance) << ")\n";
    err << rows.size() - failures << "/" << rows.size() << " checks passed\n";
    return failures ? exit_verify_failed : exit_ok;
  }
};

// ------------------------------------------------------------------ simulate

struct SimulateCommand {
  ShapeOptions shape;
  int n = 20;
  double omega = 0.1;
  CLI::Option* snr_opt = nullptr;
  double snr_db = 0.0;
  double rho = 0.15;
  std::string matrix = "iid";
  double epsilon = 0.1;
  double alpha = 0.1;
  int trials = 100;
  std::uint64_t seed = 1;
  double budget_seconds = 0.0;
  std::string out_path;

  void add(CLI::App* app) {
    shape.add(app);
    app->add_option("--n", n, "Dimension, 8..28")->capture_default_str();
    app->add_option("--omega", omega, "Sparsity rate; k = floor(omega n)")->capture_default_str();
    snr_opt = app->add_option("--snr-db", snr_db, "Source power in dB (omit for noiseless sampling)");
    app->add_option("--rho", rho, "Sampling rate; m = ceil(rho n)")->capture_default_str();
    app->add_option("--matrix", matrix, "iid or rate-sharing")
        ->check(CLI::IsMember({"iid", "rate-sharing"}))
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "Rate-sharing slack")->capture_default_str();
    app->add_option("--alpha", alpha, "Success threshold on the distortion")->capture_default_str();
    app->add_option("--trials", trials, "Number of trials")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--budget-seconds", budget_seconds, "Wall-clock budget, 0 for none")->capture_default_str();
    app->add_option("--out", out_path, "Per-trial CSV path (default: stdout)");
  }

  Config config() const {
    Config c;
    shape.record(c);
    c.emplace_back("n", std::to_string(n));
    c.emplace_back("omega", format_number(omega));
    if (snr_opt->count()) c.emplace_back("snr-db", format_number(snr_db));
    c.emplace_back("rho", format_number(rho));
    c.emplace_back("matrix", matrix);
    c.emplace_back("epsilon", format_number(epsilon));
    c.emplace_back("alpha", format_number(alpha));
    c.emplace_back("trials", std::to_string(trials));
    c.emplace_back("budget-seconds", format_number(budget_seconds));
    return c;
  }

  int run(std::ostream& out, std::ostream& err) const {
    SimConfig c;
    c.n = n;
    c.omega = omega;
    c.dist = shape.shape();
    if (snr_opt->count()) c.snr_db = snr_db;
    c.rho = rho;
    c.matrix = matrix == "iid" ? MatrixKind::iid_gaussian : MatrixKind::rate_sharing;
    c.epsilon = epsilon;
    c.alpha = alpha;
    c.trials = trials;
    c.seed = seed;
    c.budget_seconds = budget_seconds;
    const SimResult res = run_experiment(c);

    deliver(out_path, out, [&](std::ostream& os) {
      CsvWriter csv(os, {"trial", "distortion", "exact", "residual_min", "runner_up_gap", "declared_error"});
      for (const auto& o : res.outcomes)
        csv.write({std::to_string(o.trial), format_number(o.distortion), o.exact ? "1" : "0",
                   format_number(o.residual_min), format_number(o.runner_up_gap), o.declared_error ? "1" : "0"});
    }, "simulate", config(), seed);

    std::ostringstream summary;
    const SimSummary& s = res.summary;
    summary << "k=" << c.k() << "\nm=" << c.m() << "\ntrials_requested=" << s.trials_requested
            << "\ntrials_run=" << s.trials_run << "\nmean_distortion=" << format_number(s.mean_distortion)
            << "\nstd_error=" << format_number(s.std_error) << "\nexact_rate=" << format_number(s.exact_rate)
            << "\nalpha=" << format_number(s.alpha) << "\nsuccess_rate=" << format_number(s.success_rate)
            << "\nsuccess_rate_below_0.9=" << (s.success_rate < 0.9 ? "true" : "false")
            << "\ndeclared_errors=" << s.declared_errors
            << "\nmean_distortion_no_declared_error=" << format_number(s.mean_distortion_no_error)
            << "\npartial=" << (s.partial ? "true" : "false") << '\n';
    if (out_path.empty()) {
      err << summary.str();
    } else {
      std::ofstream f(out_path + ".summary", std::ios::binary);
      f << summary.str();
    }
    return exit_ok;
  }
};

// ------------------------------------------------------------------ truncate-table

struct TruncateTableCommand {
  ShapeOptions shape;
  CLI::Option* snr_opt = nullptr;
  double snr_db = 0.0;
  double omega = 0.1;
  std::string grid = "lin:0.1:1:10";
  bool bits = false;
  std::string out_path;

  void add(CLI::App* app) {
    shape.add(app);
    snr_opt = app->add_option("--snr-db", snr_db, "Rescale the law so that omega * E[X^2] = 10^(snr/10)");
    app->add_option("--omega", omega, "Sparsity rate used with --snr-db")->capture_default_str();
    app->add_option("--grid", grid, "Grid of beta values in (0,1]")->capture_default_str();
    app->add_flag("--bits", bits, "Report differential entropy in bits");
    app->add_option("--out", out_path, "CSV output path (default: stdout)");
  }

  Config config() const {
    Config c;
    shape.record(c);
    if (snr_opt->count()) c.emplace_back("snr-db", format_number(snr_db));
    c.emplace_back("omega", format_number(omega));
    c.emplace_back("grid", grid);
    c.emplace_back("bits", bits ? "true" : "false");
    return c;
  }

  int run(std::ostream& out, std::ostream&) const {
    DistributionSpec law = shape.shape();
    if (snr_opt->count()) law = scale_to_power(law, omega, std::pow(10.0, snr_db / 10.0));
    const std::vector<double> g = parse_grid(grid);
    std::vector<TruncationResult> rows;
    for (double beta : g) rows.push_back(truncate(law, beta));
    const double unit = bits ? std::log(2.0) : 1.0;
    deliver(out_path, out, [&](std::ostream& os) {
      CsvWriter csv(os, {"dist", "beta", "threshold", "mean", "variance", "second_moment", "entropy"});
      for (const auto& t : rows)
        csv.write({to_string(law.kind()), format_number(t.beta), format_number(t.threshold), format_number(t.mean),
                   format_number(t.variance), format_number(t.second_moment()),
                   t.diff_entropy ? format_number(*t.diff_entropy / unit) : ""});
    }, "truncate-table", config(), 0);
    return exit_ok;
  }
};

/// Appends options read from `--config <file>` (key=value lines, '#'
/// comments) that the subcommand knows and the command line does not set.
/// Unknown keys, such as the run-manifest header, are ignored.
inline std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  if (args.size() < 2) return args;
  CLI::App* sub = app.get_subcommand_no_throw(args[1]);
  if (!sub) return args;
  std::string path;
  std::vector<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    given.push_back(name);
    if (name == "config") path = a.find('=') != std::string::npos ? a.substr(a.find('=') + 1)
                                 : (i + 1 < args.size() ? args[i + 1] : "");
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw usage_error("cannot read config file " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "config" || std::find(given.begin(), given.end(), key) != given.end()) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace cli

/// Entry point of the `srd` tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lower bounds and verification tools for approximate sparsity-pattern recovery", "srd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SRD_VERSION);

  cli::BoundsCommand bounds;
  cli::SnrCurveCommand snr;
  cli::VerifyCommand verify;
  cli::SimulateCommand simulate;
  cli::TruncateTableCommand table;

  std::string config_path;
  auto setup = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.add(sub);
    sub->add_option("--config", config_path, "key=value file; flags given on the command line take precedence");
    return sub;
  };
  CLI::App* s_bounds = setup("bounds", "Lower bounds on the sampling rate as distortion varies", bounds);
  CLI::App* s_snr = setup("snr-curve", "Lower bound versus SNR for the floor-limited law class", snr);
  CLI::App* s_verify = setup("verify", "Numerical verification suites", verify);
  CLI::App* s_sim = setup("simulate", "Recovery experiments at desk scale", simulate);
  CLI::App* s_table = setup("truncate-table", "Moments of the beta-truncated law", table);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = cli::merge_config(app, args);
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  std::vector<const char*> ptrs;
  for (const auto& a : args) ptrs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }

  try {
    if (s_bounds->parsed()) return bounds.run(out, err);
    if (s_snr->parsed()) return snr.run(out, err);
    if (s_verify->parsed()) return verify.run(out, err);
    if (s_sim->parsed()) return simulate.run(out, err);
    if (s_table->parsed()) return table.run(out, err);
  } catch (const budget_error& e) {
    err << "refused: " << e.what() << '\n';
    return exit_budget;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace srd
