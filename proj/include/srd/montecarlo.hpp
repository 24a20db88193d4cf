#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "srd/common.hpp"
#include "srd/distributions.hpp"
#include "srd/parallel.hpp"
#include "srd/ratefun.hpp"

namespace srd {

using big_int = boost::multiprecision::cpp_int;

struct MCConfig {
  int n = 100;
  double r = 1.0;
  double gamma = 1.0;
  int trials = 1;
  std::uint64_t seed = 1;

  int m() const { return static_cast<int>(std::lround(r * n)); }
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  double target = 0.0;
  double relative_gap = 0.0;
  int rejected = 0;
};

namespace detail {

inline void validate(const MCConfig& c, const char* who) {
  require(c.n >= 8, std::string(who) + ": n must be >= 8");
  require(c.r > 0.0 && c.m() >= 1, std::string(who) + ": r*n must round to at least 1");
  require(c.gamma >= 0.0, std::string(who) + ": gamma must be >= 0");
  require(c.trials >= 1, std::string(who) + ": trials must be >= 1");
}

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, rng_type& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  return m;
}

// Runs `trial(rng)` per task; a nullopt result is a rejected draw and the
// task redraws from the same stream.
template <class Trial>
MCEstimate run_trials(const MCConfig& c, std::uint64_t stream, double target, Trial&& trial) {
  std::vector<double> values(c.trials);
  std::vector<int> rejected(c.trials, 0);
  parallel_for(static_cast<std::size_t>(c.trials), [&](std::size_t t) {
    rng_type rng(derive_seed(c.seed, stream, t));
    for (;;) {
      if (auto v = trial(rng)) {
        values[t] = *v;
        return;
      }
      if (++rejected[t] > 100) throw accuracy_error("Monte-Carlo trial kept failing", 0.0);
    }
  });
  MCEstimate est;
  est.trials = c.trials;
  est.target = target;
  est.mean = pairwise_sum(values.data(), values.size()) / c.trials;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - est.mean) * (values[i] - est.mean);
  if (c.trials > 1)
    est.std_error = std::sqrt(pairwise_sum(sq.data(), sq.size()) / (c.trials - 1) / c.trials);
  est.relative_gap = std::abs(est.mean - target) / std::max(std::abs(target), 1e-12);
  for (int r : rejected) est.rejected += r;
  return est;
}

}  // namespace detail

/// (1/2n) log det(I + (gamma/n) M M^T) for standard Gaussian m x n matrices,
/// via Cholesky of the smaller Gram orientation. Target: info_G(r, gamma).
inline MCEstimate mp_logdet(const MCConfig& c) {
  detail::validate(c, "mp_logdet");
  const int n = c.n;
  const int m = c.m();
  const double ratio = static_cast<double>(m) / n;
  return detail::run_trials(c, 1, info_G(ratio, c.gamma), [&](rng_type& rng) -> std::optional<double> {
    if (c.gamma == 0.0) return 0.0;
    const Eigen::MatrixXd a = detail::gaussian_matrix(m, n, rng);
    Eigen::MatrixXd g = m <= n ? Eigen::MatrixXd(a * a.transpose()) : Eigen::MatrixXd(a.transpose() * a);
    g *= c.gamma / n;
    g.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    if (!std::isfinite(logdet)) return std::nullopt;
    return logdet / (2.0 * n);
  });
}

inline double det_power_target(double r) {
  detail::require(r >= 1.0, "det_power: the limit is stated for r >= 1");
  if (r == 1.0) return 1.0 / e;
  return std::pow(r / (r - 1.0), r - 1.0) / e;
}

/// |(1/m) M^T M|^(1/n) from the log singular values of M.
inline MCEstimate det_power(const MCConfig& c) {
  detail::validate(c, "det_power");
  if (c.r < 1.0) throw domain_error("det_power: r must be >= 1");
  const int n = c.n;
  const int m = c.m();
  return detail::run_trials(c, 2, det_power_target(c.r), [&](rng_type& rng) -> std::optional<double> {
    const Eigen::MatrixXd a = detail::gaussian_matrix(m, n, rng);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd s = svd.singularValues();
    if ((s.array() <= 0.0).any()) return std::nullopt;
    const double log_det = 2.0 * s.array().log().sum() - n * std::log(static_cast<double>(m));
    return std::exp(log_det / n);
  });
}

/// Same quantity through the raw determinant; only sensible for small n.
inline MCEstimate det_power_direct(const MCConfig& c) {
  detail::validate(c, "det_power_direct");
  if (c.r < 1.0) throw domain_error("det_power_direct: r must be >= 1");
  const int n = c.n;
  const int m = c.m();
  return detail::run_trials(c, 2, det_power_target(c.r), [&](rng_type& rng) -> std::optional<double> {
    const Eigen::MatrixXd a = detail::gaussian_matrix(m, n, rng);
    const double det = (a.transpose() * a / static_cast<double>(m)).determinant();
    if (!(det > 0.0)) return std::nullopt;
    return std::pow(det, 1.0 / n);
  });
}

enum class EntryLaw { gaussian, rademacher };

namespace detail {

// Fraction-free elimination; exact for integer matrices.
inline bool integer_singular(std::vector<big_int> a, int k) {
  big_int prev = 1;
  for (int p = 0; p < k; ++p) {
    int pivot = p;
    while (pivot < k && a[pivot * k + p] == 0) ++pivot;
    if (pivot == k) return true;
    if (pivot != p)
      for (int j = 0; j < k; ++j) std::swap(a[p * k + j], a[pivot * k + j]);
    for (int i = p + 1; i < k; ++i) {
      for (int j = p + 1; j < k; ++j)
        a[i * k + j] = (a[i * k + j] * a[p * k + p] - a[i * k + p] * a[p * k + j]) / prev;
      a[i * k + p] = 0;
    }
    prev = a[p * k + p];
  }
  return false;
}

}  // namespace detail

/// Empirical probability that a k x k iid matrix, k = floor(omega n), is
/// rank deficient.
inline double rank_deficiency(int n, double omega, EntryLaw law, int trials, std::uint64_t seed) {
  detail::require(n >= 1 && omega > 0.0 && omega <= 1.0, "rank_deficiency: need n >= 1, omega in (0,1]");
  detail::require(trials >= 1, "rank_deficiency: trials must be >= 1");
  const int k = static_cast<int>(std::floor(omega * n + 1e-9));
  if (k == 0) return 0.0;
  std::vector<int> deficient(trials, 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    rng_type rng(derive_seed(seed, 3, t));
    if (law == EntryLaw::gaussian) {
      const Eigen::MatrixXd a = detail::gaussian_matrix(k, k, rng);
      deficient[t] = Eigen::FullPivLU<Eigen::MatrixXd>(a).rank() < k;
    } else {
      std::bernoulli_distribution coin(0.5);
      std::vector<big_int> a(static_cast<std::size_t>(k) * k);
      for (auto& x : a) x = coin(rng) ? 1 : -1;
      deficient[t] = detail::integer_singular(std::move(a), k);
    }
  });
  int total = 0;
  for (int d : deficient) total += d;
  return static_cast<double>(total) / trials;
}

inline big_int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  big_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Number of size-k supports within distortion alpha of a fixed support:
/// sum over a <= floor(alpha k) of C(k,a) C(n-k,a).
inline big_int n_tilde(int n, int k, double alpha) {
  detail::require(k >= 0 && 2 * k <= n, "n_tilde: need 0 <= k <= n/2");
  detail::require(alpha >= 0.0 && alpha <= 1.0, "n_tilde: alpha must lie in [0,1]");
  if (n > 64) throw domain_error("n_tilde: exact counts are limited to n <= 64; use log_n_tilde");
  const int amax = static_cast<int>(std::floor(alpha * k + 1e-9));
  big_int total = 0;
  for (int a = 0; a <= amax; ++a) total += binomial(k, a) * binomial(n - k, a);
  return total;
}

struct LogCount {
  double value;
  bool exact;  // false when computed in floating point
};

inline LogCount log_n_tilde(int n, int k, double alpha) {
  if (n <= 64) {
    return {std::log(n_tilde(n, k, alpha).convert_to<double>()), true};
  }
  detail::require(k >= 0 && 2 * k <= n, "log_n_tilde: need 0 <= k <= n/2");
  const int amax = static_cast<int>(std::floor(alpha * k + 1e-9));
  auto lbinom = [](int a, int b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  double mx = -INFINITY;
  std::vector<double> terms;
  for (int a = 0; a <= amax; ++a) {
    terms.push_back(lbinom(k, a) + lbinom(n - k, a));
    mx = std::max(mx, terms.back());
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return {mx + std::log(s), false};
}

struct CoveringBracket {
  big_int lower;
  std::size_t upper = 0;
  std::vector<std::uint32_t> cover;  // chosen supports as bit masks
};

namespace detail {

inline std::vector<std::vector<std::uint64_t>> binomial_table(int n) {
  std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (int i = 0; i <= n; ++i) {
    c[i][0] = 1;
    for (int j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  return c;
}

inline void lex_supports(int n, int k, int start, std::uint32_t mask, std::vector<std::uint32_t>& out) {
  if (k == 0) {
    out.push_back(mask);
    return;
  }
  for (int i = start; i <= n - k; ++i) lex_supports(n, k - 1, i + 1, mask | (1u << i), out);
}

// Calls fn(mask) for every size-a subset of the given positions.
template <class Fn>
void for_each_subset(const std::vector<int>& pos, int a, Fn&& fn) {
  const int sz = static_cast<int>(pos.size());
  if (a > sz) return;
  std::vector<int> idx(a);
  for (int i = 0; i < a; ++i) idx[i] = i;
  for (;;) {
    std::uint32_t m = 0;
    for (int i : idx) m |= 1u << pos[i];
    fn(m);
    int i = a - 1;
    while (i >= 0 && idx[i] == sz - a + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < a; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Bracket on the minimal number of size-k supports whose distortion-alpha
/// balls cover all C(n,k) supports. Lower: counting bound ceil(C(n,k)/N~).
/// Upper: greedy cover, ties broken toward the lexicographically smallest
/// support, so the result is deterministic.
inline CoveringBracket covering_bracket(int n, int k, double alpha, std::size_t budget = 20000) {
  detail::require(n >= 1 && n <= 24, "covering_bracket: n must lie in [1, 24]");
  detail::require(k >= 1 && 2 * k <= n, "covering_bracket: need 1 <= k <= n/2");
  detail::require(alpha >= 0.0 && alpha <= 1.0, "covering_bracket: alpha must lie in [0,1]");
  const big_int total = binomial(n, k);
  if (total > budget)
    throw budget_error("covering_bracket: C(n,k) exceeds the enumeration budget");

  CoveringBracket out;
  const big_int nt = n_tilde(n, k, alpha);
  out.lower = (total + nt - 1) / nt;

  std::vector<std::uint32_t> supports;
  detail::lex_supports(n, k, 0, 0, supports);
  const auto binom = detail::binomial_table(n);
  auto colex = [&](std::uint32_t mask) {
    std::size_t r = 0;
    int j = 1;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) r += binom[i][j++];
    return r;
  };
  const std::size_t count = supports.size();
  std::vector<std::size_t> lex_of(count);
  for (std::size_t i = 0; i < count; ++i) lex_of[colex(supports[i])] = i;

  const int amax = static_cast<int>(std::floor(alpha * k + 1e-9));
  // Calls fn(lex index) for every support within distortion alpha of s.
  auto neighbours = [&](std::uint32_t s, auto&& fn) {
    std::vector<int> in;
    std::vector<int> outside;
    for (int i = 0; i < n; ++i) (s >> i & 1u ? in : outside).push_back(i);
    for (int a = 0; a <= amax; ++a) {
      detail::for_each_subset(in, a, [&](std::uint32_t drop) {
        detail::for_each_subset(outside, a, [&](std::uint32_t add) {
          fn(lex_of[colex((s & ~drop) | add)]);
        });
      });
    }
  };

  const auto ball = static_cast<std::int64_t>(nt);
  std::vector<std::int64_t> gain(count, ball);
  std::vector<char> covered(count, 0);
  std::size_t remaining = count;
  while (remaining > 0) {
    const std::size_t pick =
        static_cast<std::size_t>(std::max_element(gain.begin(), gain.end()) - gain.begin());
    out.cover.push_back(supports[pick]);
    neighbours(supports[pick], [&](std::size_t u) {
      if (covered[u]) return;
      covered[u] = 1;
      --remaining;
      neighbours(supports[u], [&](std::size_t v) { --gain[v]; });
    });
  }
  out.upper = out.cover.size();
  return out;
}

/// Relative overlap distortion between two equal-size supports.
inline double support_distortion(std::uint32_t s, std::uint32_t t) {
  const int k = std::popcount(s);
  if (k == 0) return 0.0;
  return 1.0 - static_cast<double>(std::popcount(s & t)) / k;
}

/// [P(omega, F_beta) / P(omega, F)] / beta^(2L) per beta.
inline std::vector<std::pair<double, double>> power_ratio_scan(const DistributionSpec& dist,
                                                               const std::vector<double>& betas) {
  const double m2 = moments(dist).second_moment;
  const double l = decay_rate(dist).L;
  std::vector<std::pair<double, double>> out;
  out.reserve(betas.size());
  for (double b : betas) {
    const TruncationResult t = truncate(dist, b);
    out.emplace_back(b, t.second_moment() / m2 / std::pow(b, 2.0 * l));
  }
  return out;
}

}  // namespace srd
