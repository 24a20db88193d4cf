#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "srd/common.hpp"
#include "srd/distributions.hpp"
#include "srd/montecarlo.hpp"
#include "srd/parallel.hpp"

namespace srd {

enum class MatrixKind { iid_gaussian, rate_sharing };

struct SimConfig {
  int n = 20;
  double omega = 0.1;
  DistributionSpec dist = DistributionSpec::gaussian(0.0, 1.0);
  std::optional<double> snr_db;  // empty: noiseless
  double rho = 0.15;
  MatrixKind matrix = MatrixKind::iid_gaussian;
  double epsilon = 0.1;  // rate-sharing slack
  double alpha = 0.1;    // success threshold for the summary
  int trials = 100;
  std::uint64_t seed = 1;
  double budget_seconds = 0.0;  // 0: no time limit
  std::uint64_t max_supports = 1000000;

  int k() const { return static_cast<int>(std::floor(omega * n + 1e-9)); }
  int m() const { return static_cast<int>(std::ceil(rho * n - 1e-9)); }
};

struct SimOutcome {
  int trial = 0;
  double distortion = 0.0;
  bool exact = false;
  double residual_min = 0.0;
  double runner_up_gap = 0.0;
  bool declared_error = false;
};

struct SimSummary {
  int trials_requested = 0;
  int trials_run = 0;
  double mean_distortion = 0.0;
  double std_error = 0.0;
  double exact_rate = 0.0;
  double success_rate = 0.0;  // Pr{d <= alpha}
  double alpha = 0.0;
  int declared_errors = 0;
  double mean_distortion_no_error = 0.0;  // over trials without a declared error
  bool partial = false;
};

struct SimResult {
  std::vector<SimOutcome> outcomes;
  SimSummary summary;
};

struct SourceDraw {
  Eigen::VectorXd x;
  std::vector<int> support;  // sorted
};

struct Measurement {
  Eigen::VectorXd y;
  Eigen::MatrixXd a;
  std::vector<int> zeroed;  // rate-sharing set U, sorted
};

inline double distortion(const std::vector<int>& truth, const std::vector<int>& estimate) {
  if (truth.empty()) return 0.0;
  std::vector<int> common;
  std::set_intersection(truth.begin(), truth.end(), estimate.begin(), estimate.end(),
                        std::back_inserter(common));
  return 1.0 - static_cast<double>(common.size()) / truth.size();
}

namespace detail {

inline std::vector<int> random_subset(int n, int size, rng_type& rng) {
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> out;
  out.reserve(size);
  std::sample(all.begin(), all.end(), std::back_inserter(out), size, rng);
  return out;
}

inline void validate(const SimConfig& c) {
  require(c.n >= 8 && c.n <= 28, "simulate: n must lie in [8, 28]");
  require(c.omega > 0.0 && c.omega <= 0.5, "simulate: omega must lie in (0, 1/2]");
  require(c.k() >= 1, "simulate: floor(omega n) must be >= 1");
  require(c.rho > 0.0 && c.m() >= 1, "simulate: ceil(rho n) must be >= 1");
  require(c.trials >= 1, "simulate: trials must be >= 1");
  if (c.matrix == MatrixKind::rate_sharing) {
    require(c.epsilon > 0.0 && c.epsilon < 1.0, "simulate: epsilon must lie in (0,1)");
    if (c.snr_db) throw domain_error("simulate: rate sharing is a noiseless construction");
    if (c.rho >= c.omega)
      throw domain_error("simulate: rate sharing needs rho < omega (the zeroed set would be empty)");
  }
  const big_int supports = binomial(c.n, c.k());
  if (supports > c.max_supports)
    throw budget_error("simulate: C(n,k) = " + supports.str() + " exceeds the exhaustive-search budget");
}

inline DistributionSpec effective_law(const SimConfig& c) {
  if (!c.snr_db) return c.dist;
  return scale_to_power(c.dist, c.omega, std::pow(10.0, *c.snr_db / 10.0));
}

}  // namespace detail

/// Support uniform over size-k subsets, nonzero values iid from `law`.
inline SourceDraw draw_source(int n, int k, const DistributionSpec& law, rng_type& rng) {
  SourceDraw d;
  d.support = detail::random_subset(n, k, rng);
  d.x = Eigen::VectorXd::Zero(n);
  for (int i : d.support) d.x(i) = draw_value(law, rng);
  return d;
}

/// y = A x (+ unit Gaussian noise when `noisy`), A with iid N(0, 1/n)
/// entries. Rate sharing zeroes a random column set U of size
/// ceil((1 - (1 - eps) rho / omega) n).
inline Measurement sample(const Eigen::VectorXd& x, const SimConfig& c, rng_type& rng) {
  const int n = static_cast<int>(x.size());
  const int m = c.m();
  Measurement out;
  out.a = detail::gaussian_matrix(m, n, rng) / std::sqrt(static_cast<double>(n));
  if (c.matrix == MatrixKind::rate_sharing) {
    const int u = std::min(
        n, static_cast<int>(std::ceil((1.0 - (1.0 - c.epsilon) * c.rho / c.omega) * n - 1e-9)));
    out.zeroed = detail::random_subset(n, u, rng);
    for (int j : out.zeroed) out.a.col(j).setZero();
  }
  out.y = out.a * x;
  if (c.snr_db) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) += normal(rng);
  }
  return out;
}

struct MLResult {
  std::vector<int> support;
  double residual_min = 0.0;
  double runner_up_gap = 0.0;
};

/// Size-k support minimizing ||y - P_s y||^2 over all C(n,k) supports, in
/// lexicographic order with strict improvement (ties keep the earlier one).
/// Projections are built incrementally by Gram-Schmidt along the enumeration
/// tree; columns already in the span add nothing.
inline MLResult exhaustive_ml(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, int k) {
  const int n = static_cast<int>(a.cols());
  const int m = static_cast<int>(a.rows());
  detail::require(k >= 1 && k <= n, "exhaustive_ml: need 1 <= k <= n");
  detail::require(y.size() == m, "exhaustive_ml: dimension mismatch");

  Eigen::MatrixXd q(m, std::min(k, m));
  std::vector<Eigen::VectorXd> residuals(k + 1);
  residuals[0] = y;
  std::vector<int> current(k);
  MLResult best;
  double best_value = std::numeric_limits<double>::infinity();
  double second_value = std::numeric_limits<double>::infinity();
  const double tiny = 1e-12;

  auto rec = [&](auto&& self, int depth, int start, int rank) -> void {
    if (depth == k) {
      const double v = residuals[k].squaredNorm();
      if (v < best_value) {
        second_value = best_value;
        best_value = v;
        best.support = current;
      } else if (v < second_value) {
        second_value = v;
      }
      return;
    }
    for (int j = start; j <= n - (k - depth); ++j) {
      current[depth] = j;
      int next_rank = rank;
      residuals[depth + 1] = residuals[depth];
      if (rank < m) {
        Eigen::VectorXd v = a.col(j);
        const double norm0 = v.norm();
        for (int pass = 0; pass < 2; ++pass)
          for (int i = 0; i < rank; ++i) v -= q.col(i).dot(v) * q.col(i);
        const double nv = v.norm();
        if (nv > tiny * std::max(norm0, 1.0) && rank < q.cols()) {
          q.col(rank) = v / nv;
          residuals[depth + 1] -= q.col(rank).dot(residuals[depth]) * q.col(rank);
          next_rank = rank + 1;
        }
      }
      self(self, depth + 1, j + 1, next_rank);
    }
  };
  rec(rec, 0, 0, 0);
  best.residual_min = best_value;
  best.runner_up_gap = std::isfinite(second_value) ? second_value - best_value : 0.0;
  return best;
}

struct RateSharingResult {
  std::vector<int> support;
  std::vector<int> stage1;
  bool declared_error = false;
};

/// Two-stage noiseless estimator for the rate-sharing matrix: the smallest
/// s0 outside U with y in span(A_s0), then k - |s0| indices drawn at random
/// from U. Several minimal s0 is a declared error; the lexicographically
/// first is kept so the output is still a size-k support.
inline RateSharingResult rate_sharing_recover(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                                              int k, const std::vector<int>& zeroed,
                                              rng_type& rng) {
  const int n = static_cast<int>(a.cols());
  std::vector<char> in_u(n, 0);
  for (int j : zeroed) in_u[j] = 1;
  std::vector<int> free;
  for (int j = 0; j < n; ++j)
    if (!in_u[j]) free.push_back(j);
  const double tol = 1e-9 * y.norm();

  RateSharingResult out;
  bool found = y.norm() == 0.0;
  const int max_size = std::min<int>(k, static_cast<int>(free.size()));
  for (int size = 1; size <= max_size && !found; ++size) {
    int hits = 0;
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    const int f = static_cast<int>(free.size());
    for (;;) {
      Eigen::MatrixXd sub(a.rows(), size);
      for (int i = 0; i < size; ++i) sub.col(i) = a.col(free[idx[i]]);
      const Eigen::VectorXd coef = sub.colPivHouseholderQr().solve(y);
      if ((y - sub * coef).norm() <= tol) {
        if (hits++ == 0) {
          out.stage1.clear();
          for (int i : idx) out.stage1.push_back(free[i]);
        } else {
          break;
        }
      }
      int i = size - 1;
      while (i >= 0 && idx[i] == f - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (hits > 0) {
      found = true;
      out.declared_error = hits > 1;
    }
  }

  std::vector<int> pool;
  std::vector<int> rest;
  std::vector<char> taken(n, 0);
  for (int j : out.stage1) taken[j] = 1;
  for (int j = 0; j < n; ++j) {
    if (taken[j]) continue;
    (in_u[j] ? pool : rest).push_back(j);
  }
  const int need = k - static_cast<int>(out.stage1.size());
  std::vector<int> fill;
  std::sample(pool.begin(), pool.end(), std::back_inserter(fill), std::min<int>(need, pool.size()), rng);
  if (static_cast<int>(fill.size()) < need)
    std::sample(rest.begin(), rest.end(), std::back_inserter(fill), need - fill.size(), rng);
  out.support = out.stage1;
  out.support.insert(out.support.end(), fill.begin(), fill.end());
  std::sort(out.support.begin(), out.support.end());
  return out;
}

inline SimOutcome run_trial(const SimConfig& c, const DistributionSpec& law, int trial) {
  rng_type rng(derive_seed(c.seed, 4, static_cast<std::uint64_t>(trial)));
  const SourceDraw src = draw_source(c.n, c.k(), law, rng);
  const Measurement meas = sample(src.x, c, rng);
  SimOutcome o;
  o.trial = trial;
  if (c.matrix == MatrixKind::rate_sharing) {
    const auto r = rate_sharing_recover(meas.y, meas.a, c.k(), meas.zeroed, rng);
    o.distortion = distortion(src.support, r.support);
    o.declared_error = r.declared_error;
  } else {
    const auto r = exhaustive_ml(meas.y, meas.a, c.k());
    o.distortion = distortion(src.support, r.support);
    o.residual_min = r.residual_min;
    o.runner_up_gap = r.runner_up_gap;
  }
  o.exact = o.distortion == 0.0;
  return o;
}

inline SimSummary summarize(const std::vector<SimOutcome>& outcomes, int requested, double alpha) {
  SimSummary s;
  s.trials_requested = requested;
  s.trials_run = static_cast<int>(outcomes.size());
  s.alpha = alpha;
  s.partial = s.trials_run < requested;
  if (outcomes.empty()) return s;
  std::vector<double> d;
  std::vector<double> d_ok;
  int exact = 0;
  int success = 0;
  for (const auto& o : outcomes) {
    d.push_back(o.distortion);
    exact += o.exact;
    success += o.distortion <= alpha + 1e-12;
    if (o.declared_error) ++s.declared_errors; else d_ok.push_back(o.distortion);
  }
  const double cnt = static_cast<double>(d.size());
  s.mean_distortion = pairwise_sum(d.data(), d.size()) / cnt;
  std::vector<double> sq(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) sq[i] = (d[i] - s.mean_distortion) * (d[i] - s.mean_distortion);
  if (d.size() > 1) s.std_error = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (cnt - 1) / cnt);
  s.exact_rate = exact / cnt;
  s.success_rate = success / cnt;
  if (!d_ok.empty()) s.mean_distortion_no_error = pairwise_sum(d_ok.data(), d_ok.size()) / d_ok.size();
  return s;
}

/// Runs all trials. Each trial draws from its own seed stream, so outcomes do
/// not depend on the worker count. With a time budget, trials not started
/// before it runs out are dropped and the summary is flagged partial.
inline SimResult run_experiment(const SimConfig& c) {
  detail::validate(c);
  const DistributionSpec law = detail::effective_law(c);
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<SimOutcome>> slots(c.trials);
  parallel_for(static_cast<std::size_t>(c.trials), [&](std::size_t t) {
    if (c.budget_seconds > 0.0) {
      const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
      if (spent.count() > c.budget_seconds) return;
    }
    slots[t] = run_trial(c, law, static_cast<int>(t));
  });
  SimResult res;
  for (auto& s : slots)
    if (s) res.outcomes.push_back(*s);
  res.summary = summarize(res.outcomes, c.trials, c.alpha);
  return res;
}

struct DiscreteDemoResult {
  bool recovered = false;
  std::size_t candidates = 0;
  double closest_gap = 0.0;  // |y - <a, x'>| for the nearest wrong candidate
};

/// A single Gaussian sample of x in {-1, 0, +1}^n with k nonzeros identifies
/// x, since distinct candidates map to distinct real numbers almost surely.
/// Checked by exhaustive inversion over all 2^k C(n,k) candidates.
inline DiscreteDemoResult discrete_single_sample_demo(int n, int k, std::uint64_t seed) {
  detail::require(n >= 1 && n <= 12 && k >= 1 && k <= n, "discrete demo: need 1 <= k <= n <= 12");
  rng_type rng(derive_seed(seed, 5, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(n);
  for (auto& v : a) v = normal(rng);
  const std::vector<int> support = detail::random_subset(n, k, rng);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<int> x(n, 0);
  for (int i : support) x[i] = coin(rng) ? 1 : -1;
  double y = 0.0;
  for (int i = 0; i < n; ++i) y += a[i] * x[i];

  DiscreteDemoResult out;
  double best = std::numeric_limits<double>::infinity();
  double closest_wrong = std::numeric_limits<double>::infinity();
  std::vector<int> best_x;
  std::vector<int> cand(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    for (std::uint32_t signs = 0; signs < (1u << k); ++signs) {
      int b = 0;
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        cand[i] = 0;
        if (mask >> i & 1u) cand[i] = (signs >> b++ & 1u) ? 1 : -1;
        v += a[i] * cand[i];
      }
      ++out.candidates;
      const double gap = std::abs(y - v);
      if (cand != x) closest_wrong = std::min(closest_wrong, gap);
      if (gap < best) {
        best = gap;
        best_x = cand;
      }
    }
  }
  out.recovered = best_x == x;
  out.closest_gap = closest_wrong;
  return out;
}

}  // namespace srd
