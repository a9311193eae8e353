#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <thread>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"
#include "mcmx/rng.hpp"
#include "mcmx/threads.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// Visit and transition counts. Counting runs over t in [m-1]: N_i is the
// number of OUTGOING transitions from i, so sum_j N_ij = N_i exactly and the
// learned rows normalize to 1. (Counting the final state as a visit would
// break that identity; see the learner module.)
// ---------------------------------------------------------------------------
struct CountSummary {
  std::vector<long long> visits;       // N_i over t in [m-1]
  std::vector<long long> transitions;  // N_ij, row-major d x d
  int dim = 0;
  int length = 0;  // m

  long long transition(int i, int j) const {
    return transitions[static_cast<std::size_t>(i) * dim + j];
  }
};

struct CoverTimeStats {
  std::vector<long long> samples;  // T_cliq per trial (censored values included)
  std::vector<bool> censored;      // parallel to samples
  long long target_m = 0;
  double empirical_exceed_prob = 0.0;  // P(T_cliq > target_m)
};

// ---------------------------------------------------------------------------
// Trajectory simulation: X_1 ~ mu, then X_{t+1} ~ M(X_t, .), each draw by
// inverse CDF over one uniform variate. Deterministic given the seed.
// ---------------------------------------------------------------------------

namespace detail {

// Per-row CDFs; the last entry is forced to 1 so a uniform draw of
// 0.99999... cannot fall off the end.
inline std::vector<double> row_cdfs(const StochasticMatrix& M) {
  const int d = M.dim();
  std::vector<double> cdf(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      acc += M(i, j);
      cdf[static_cast<std::size_t>(i) * d + j] = acc;
    }
    cdf[static_cast<std::size_t>(i) * d + (d - 1)] = 1.0;
  }
  return cdf;
}

inline int draw_from_cdf(const double* cdf, int d, double u) {
  return static_cast<int>(std::upper_bound(cdf, cdf + d, u) - cdf);
}

}  // namespace detail

inline Trajectory sample_trajectory(const StochasticMatrix& M, const ProbDist& mu,
                                    int m, std::uint64_t seed) {
  if (m < 1) throw OutOfRange("trajectory length must be >= 1");
  const int d = M.dim();
  const std::vector<double> cdf = detail::row_cdfs(M);
  std::vector<double> mu_cdf(d);
  double acc = 0.0;
  for (int i = 0; i < d; ++i) {
    acc += mu[i];
    mu_cdf[i] = acc;
  }
  mu_cdf[d - 1] = 1.0;

  SplitMix64 rng(seed);
  Trajectory x;
  x.dim = d;
  x.states.resize(m);
  x.states[0] = detail::draw_from_cdf(mu_cdf.data(), d, rng.uniform());
  for (int t = 1; t < m; ++t)
    x.states[t] = detail::draw_from_cdf(
        cdf.data() + static_cast<std::size_t>(x.states[t - 1]) * d, d,
        rng.uniform());
  return x;
}

inline CountSummary count_summary(const Trajectory& x) {
  const int d = x.dim;
  CountSummary c;
  c.dim = d;
  c.length = x.length();
  c.visits.assign(d, 0);
  c.transitions.assign(static_cast<std::size_t>(d) * d, 0);
  for (int t = 0; t + 1 < x.length(); ++t) {
    const int i = x.states[t], j = x.states[t + 1];
    ++c.visits[i];
    ++c.transitions[static_cast<std::size_t>(i) * d + j];
  }
  return c;
}

// ---------------------------------------------------------------------------
// Inner-clique cover time. For the two-tier rim family (d = 6k: a clique of
// d/3 states, each tethered to two sticky rim states), T_cliq is the first
// time every clique state {1..d/3} has been visited. Trials start from the
// uniform law (= stationary for that family) and are censored at
// 50 * threshold_m; censored trials count as exceedances, which can only
// understate the tail never inflate it.
// ---------------------------------------------------------------------------

struct CouponBound {
  double mean_lb = 0.0;   // 1 + (d/3)/eta * H_{d/3-1}
  double var_ub = 0.0;    // ((d/3-1)^2 / eta^2) * (pi^2 / 6)
  long long threshold_m = 0;  // floor((d / (20 eta)) ln(d/3))
};

inline CouponBound coupon_collector_bound(int d, double eta) {
  if (d < 12 || d % 6 != 0)
    throw OutOfRange("d must be a multiple of 6, at least 12");
  if (!(eta > 0.0 && eta < 1.0 / 48.0))
    throw OutOfRange("eta must lie in (0, 1/48)");
  const int n = d / 3;
  double harmonic = 0.0;
  for (int i = 1; i <= n - 1; ++i) harmonic += 1.0 / i;
  CouponBound b;
  b.mean_lb = 1.0 + n / eta * harmonic;
  b.var_ub = (static_cast<double>(n - 1) * (n - 1) / (eta * eta)) *
             (std::numbers::pi * std::numbers::pi / 6.0);
  b.threshold_m =
      static_cast<long long>(std::floor(d / (20.0 * eta) * std::log(n)));
  return b;
}

inline CoverTimeStats cover_time_inner_clique(const StochasticMatrix& M, int d,
                                              long long m_limit, int trials,
                                              std::uint64_t seed) {
  if (d < 12 || d % 6 != 0)
    throw InvalidDimension("rim-family cover time needs d = 6k, k >= 2");
  if (M.dim() != d) throw InvalidDimension("matrix dimension mismatch");
  const int clique = d / 3;
  const long long cap = 50 * m_limit;
  const std::vector<double> cdf = detail::row_cdfs(M);

  CoverTimeStats stats;
  stats.target_m = m_limit;
  stats.samples.assign(trials, 0);
  stats.censored.assign(trials, false);

  const int workers = std::min<int>(trials, worker_count());
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int trial = next.fetch_add(1);
        if (trial >= trials) return;
        SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(trial)}));
        int x = static_cast<int>(rng.below(d));  // uniform = stationary start
        std::uint32_t seen = x < clique ? (1u << x) : 0u;
        const std::uint32_t full = (1u << clique) - 1;
        long long t = 1;
        while (seen != full && t < cap) {
          ++t;
          x = detail::draw_from_cdf(cdf.data() + static_cast<std::size_t>(x) * d,
                                    d, rng.uniform());
          if (x < clique) seen |= 1u << x;
        }
        stats.samples[trial] = t;
        stats.censored[trial] = (seen != full);
      }
    });
  for (auto& t : pool) t.join();

  long long exceed = 0;
  for (int i = 0; i < trials; ++i)
    if (stats.samples[i] > m_limit || stats.censored[i]) ++exceed;
  stats.empirical_exceed_prob = static_cast<double>(exceed) / trials;
  return stats;
}

}  // namespace mcmx
