#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"
#include "mcmx/threads.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// SpectralReport: eigenstructure plus the two gap notions.
//   gamma    = 1 - lambda_2            (reversible chains)
//   gamma_ps = max_k gamma((M*)^k M^k) / k   (any ergodic chain)
// ---------------------------------------------------------------------------
struct SpectralReport {
  std::vector<double> eigenvalues;   // descending; empty if not computed
  std::optional<double> gap;         // gamma, reversible case only
  double pseudo_gap = 0.0;           // gamma_ps
  int pseudo_gap_argmax_k = 0;
  int k_cap_used = 0;
};

namespace detail {

// Eigenvalues of a chain reversible w.r.t. pi, via the similar symmetric
// matrix D^{1/2} M D^{-1/2} (D = diag(pi)). Returned descending.
inline std::vector<double> reversible_eigenvalues(const StochasticMatrix& M,
                                                  const ProbDist& pi) {
  const int d = M.dim();
  Eigen::MatrixXd S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      S(i, j) = std::sqrt(pi[i] / pi[j]) * M(i, j);
  S = 0.5 * (S + S.transpose().eval());  // scrub fp asymmetry
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  std::vector<double> evs(es.eigenvalues().data(), es.eigenvalues().data() + d);
  std::sort(evs.begin(), evs.end(), std::greater<double>());
  return evs;
}

inline Eigen::MatrixXd to_eigen(const StochasticMatrix& M) {
  const int d = M.dim();
  Eigen::MatrixXd out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = M(i, j);
  return out;
}

inline StochasticMatrix from_eigen_stochastic(const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  Matrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = std::max(A(i, j), 0.0);
  return validate_stochastic(m, 1e-6);
}

}  // namespace detail

inline SpectralReport reversible_spectrum(const StochasticMatrix& M,
                                          const ProbDist& pi) {
  if (!is_reversible(M, pi))
    throw NotReversible("chain does not satisfy detailed balance");
  SpectralReport r;
  r.eigenvalues = detail::reversible_eigenvalues(M, pi);
  r.gap = 1.0 - r.eigenvalues[1];
  return r;
}

// gamma_ps = max_k gamma((M*)^k M^k) / k with M* the time reversal.
// (M*)^k M^k is similar to a Gram matrix (A^T A with A = D^{1/2} M^k D^{-1/2}),
// so its spectrum lies in [0, 1] and gamma((M*)^k M^k) <= 1. Hence once the
// running best satisfies best >= 1/k no later term can win, and iteration
// stops. A hard cap (default 10 * ceil(1 / best-so-far), user-overridable)
// backstops the loop.
inline SpectralReport pseudo_spectral_gap(const StochasticMatrix& M,
                                          const ProbDist& pi,
                                          std::optional<int> k_cap = {}) {
  if (!is_ergodic(M)) throw NotErgodic("pseudo-spectral gap needs ergodicity");
  const int d = M.dim();
  const Eigen::MatrixXd Me = detail::to_eigen(M);
  const Eigen::MatrixXd Re = detail::to_eigen(time_reversal(M, pi));

  SpectralReport r;
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd Rk = Eigen::MatrixXd::Identity(d, d);
  double best = 0.0;
  int best_k = 0, k = 0;
  for (;;) {
    ++k;
    Mk = Mk * Me;
    Rk = Rk * Re;
    const StochasticMatrix P = detail::from_eigen_stochastic(Rk * Mk);
    const std::vector<double> ev = detail::reversible_eigenvalues(P, pi);
    const double term = (1.0 - ev[1]) / k;
    if (term > best) {
      best = term;
      best_k = k;
    }
    const int cap = k_cap ? *k_cap
                          : (best > 0.0 ? 10 * static_cast<int>(std::ceil(1.0 / best))
                                        : 1000);
    if ((best > 0.0 && 1.0 / (k + 1) <= best) || k >= cap) {
      r.k_cap_used = cap;
      break;
    }
  }
  r.pseudo_gap = best;
  r.pseudo_gap_argmax_k = best_k;
  if (is_reversible(M, pi)) {
    r.eigenvalues = detail::reversible_eigenvalues(M, pi);
    r.gap = 1.0 - r.eigenvalues[1];
  }
  return r;
}

// Dobrushin contraction coefficient kappa(M) = 1/2 max_{i,j} ||M(i,.) - M(j,.)||_1.
inline double dobrushin(const StochasticMatrix& M) {
  const int d = M.dim();
  double best = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double sum = 0.0;
      for (int c = 0; c < d; ++c) sum += std::abs(M(i, c) - M(j, c));
      best = std::max(best, sum);
    }
  return 0.5 * best;
}

inline StochasticMatrix matrix_power(const StochasticMatrix& M, int t) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(M.dim(), M.dim());
  const Eigen::MatrixXd Me = detail::to_eigen(M);
  for (int i = 0; i < t; ++i) P = P * Me;
  return detail::from_eigen_stochastic(P);
}

// ---------------------------------------------------------------------------
// Cheeger constant Phi = min over nonempty S with pi(S) <= 1/2 of
//   sum_{i in S, j not in S} pi(i) M(i,j) / pi(S).
// Exact subset enumeration, hard-capped at d = 25. The walk visits subsets in
// Gray-code order so each step updates the cut flow in O(d); state is rebuilt
// from scratch at fixed 2^16-aligned positions, which caps rounding drift and
// makes the result independent of how the mask range is partitioned across
// workers.
// ---------------------------------------------------------------------------

namespace detail {

struct CheegerScratch {
  std::uint32_t mask = 0;
  double flow = 0.0;        // sum_{i in S, j notin S} Q(i,j)
  long double pi_s = 0.0;   // pi(S)
  std::vector<double> row_into_s;   // a[u] = sum_{j in S} Q(u,j)
  std::vector<double> col_from_s;   // b[u] = sum_{i in S} Q(i,u)
};

// Rebuilds the incremental state for the subset `mask`.
inline void cheeger_init(const std::vector<double>& Q, int d,
                         const ProbDist& pi, std::uint32_t mask,
                         CheegerScratch& s) {
  s.mask = mask;
  s.flow = 0.0;
  s.pi_s = 0.0;
  s.row_into_s.assign(d, 0.0);
  s.col_from_s.assign(d, 0.0);
  for (int i = 0; i < d; ++i) {
    const bool in_i = (mask >> i) & 1u;
    if (in_i) s.pi_s += pi[i];
    for (int j = 0; j < d; ++j) {
      const double q = Q[static_cast<std::size_t>(i) * d + j];
      const bool in_j = (mask >> j) & 1u;
      if (in_j) s.row_into_s[i] += q;
      if (in_i) {
        s.col_from_s[j] += q;
        if (!in_j) s.flow += q;
      }
    }
  }
}

inline void cheeger_toggle(const std::vector<double>& Q, int d,
                           const ProbDist& pi, int v, CheegerScratch& s) {
  const double* qrow = Q.data() + static_cast<std::size_t>(v) * d;
  const double row_total = [&] {
    double t = 0.0;
    for (int j = 0; j < d; ++j) t += qrow[j];
    return t;
  }();
  if (!((s.mask >> v) & 1u)) {
    // v enters S: gains v's edges to the outside, loses S's edges into v.
    s.flow += (row_total - qrow[v] - s.row_into_s[v]) - s.col_from_s[v];
    s.pi_s += pi[v];
    for (int u = 0; u < d; ++u) {
      s.row_into_s[u] += Q[static_cast<std::size_t>(u) * d + v];
      s.col_from_s[u] += qrow[u];
    }
    s.mask |= (1u << v);
  } else {
    s.mask &= ~(1u << v);
    s.pi_s -= pi[v];
    for (int u = 0; u < d; ++u) {
      s.row_into_s[u] -= Q[static_cast<std::size_t>(u) * d + v];
      s.col_from_s[u] -= qrow[u];
    }
    s.flow -= (row_total - qrow[v] - s.row_into_s[v]) - s.col_from_s[v];
  }
}

inline std::uint32_t gray(std::uint64_t i) {
  return static_cast<std::uint32_t>(i ^ (i >> 1));
}

// Minimizes over Gray positions [begin, end); positions index the walk, the
// subset at position i is gray(i).
inline double cheeger_window(const std::vector<double>& Q, int d,
                             const ProbDist& pi, std::uint64_t begin,
                             std::uint64_t end) {
  CheegerScratch s;
  cheeger_init(Q, d, pi, gray(begin - 1), s);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = begin; i < end; ++i) {
    cheeger_toggle(Q, d, pi, std::countr_zero(i), s);
    if (s.mask != 0 && static_cast<double>(s.pi_s) <= 0.5 + 1e-12) {
      const double val = s.flow / static_cast<double>(s.pi_s);
      best = std::min(best, val);
    }
  }
  return best;
}

}  // namespace detail

inline double cheeger(const StochasticMatrix& M, const ProbDist& pi) {
  const int d = M.dim();
  if (d > 25)
    throw DimensionTooLargeForExact("exact Cheeger enumeration capped at d=25, got d=" +
                                    std::to_string(d));
  if (!is_ergodic(M)) throw NotErgodic("Cheeger constant needs ergodicity");
  std::vector<double> Q(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      Q[static_cast<std::size_t>(i) * d + j] = pi[i] * M(i, j);

  const std::uint64_t total = 1ull << d;
  const std::uint64_t window = 1ull << 16;
  const std::uint64_t n_windows = (total + window - 1) / window;
  std::vector<double> mins(n_windows,
                           std::numeric_limits<double>::infinity());
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(n_windows, worker_count()));
  std::vector<std::thread> pool;
  std::atomic<std::uint64_t> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t wi = next.fetch_add(1);
        if (wi >= n_windows) return;
        const std::uint64_t begin = std::max<std::uint64_t>(1, wi * window);
        const std::uint64_t end = std::min(total, (wi + 1) * window);
        if (begin < end)
          mins[wi] = detail::cheeger_window(Q, d, pi, begin, end);
      }
    });
  for (auto& t : pool) t.join();
  return *std::min_element(mins.begin(), mins.end());
}

// Verifies the contraction ||(mu - mu') M||_1 <= kappa(M) ||mu - mu'||_1 on a
// concrete pair; returns (lhs, rhs).
inline std::pair<double, double> contraction_check(const StochasticMatrix& M,
                                                   const ProbDist& mu,
                                                   const ProbDist& mu2) {
  const int d = M.dim();
  double lhs = 0.0;
  for (int j = 0; j < d; ++j) {
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += (mu[i] - mu2[i]) * M(i, j);
    lhs += std::abs(v);
  }
  return {lhs, dobrushin(M) * l1_distance(mu, mu2)};
}

// ---------------------------------------------------------------------------
// Diagnostics bundle
// ---------------------------------------------------------------------------

inline ChainDiagnostics compute_diagnostics(const StochasticMatrix& M,
                                            std::optional<ProbDist> mu = {}) {
  ChainDiagnostics diag;
  diag.stationary = stationary_distribution(M);
  diag.pi_min = pi_min(diag.stationary);
  const SpectralReport ps = pseudo_spectral_gap(M, diag.stationary);
  diag.pseudo_spectral_gap = ps.pseudo_gap;
  diag.pseudo_gap_argmax_k = ps.pseudo_gap_argmax_k;
  diag.spectral_gap = ps.gap;
  diag.dobrushin = dobrushin(M);
  diag.dobrushin_squared = dobrushin(matrix_power(M, 2));
  if (M.dim() <= 25) diag.cheeger = cheeger(M, diag.stationary);
  diag.pi_mu = mu ? pi_mu(*mu, diag.stationary) : 1.0;
  return diag;
}

}  // namespace mcmx
