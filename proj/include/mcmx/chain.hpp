#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcmx/errors.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// Core types
// ---------------------------------------------------------------------------

// Dense square real matrix, row-major. Not necessarily stochastic: matrix
// differences and raw user input live here.
struct Matrix {
  int dim = 0;
  std::vector<double> a;  // dim * dim entries, row-major

  Matrix() = default;
  explicit Matrix(int d) : dim(d), a(static_cast<std::size_t>(d) * d, 0.0) {}

  double operator()(int i, int j) const {
    return a[static_cast<std::size_t>(i) * dim + j];
  }
  double& operator()(int i, int j) {
    return a[static_cast<std::size_t>(i) * dim + j];
  }
};

inline Matrix operator-(const Matrix& x, const Matrix& y) {
  Matrix out(x.dim);
  for (std::size_t k = 0; k < x.a.size(); ++k) out.a[k] = x.a[k] - y.a[k];
  return out;
}

// Distribution over [d]. Entries nonnegative, summing to 1 within the
// validation tolerance (renormalized on construction).
struct ProbDist {
  std::vector<double> w;

  int dim() const { return static_cast<int>(w.size()); }
  double operator[](int i) const { return w[static_cast<std::size_t>(i)]; }
};

// Row-stochastic transition matrix. Construct through validate_stochastic so
// the row invariants hold from then on.
struct StochasticMatrix {
  Matrix m;

  int dim() const { return m.dim; }
  double operator()(int i, int j) const { return m(i, j); }

  ProbDist row(int i) const {
    ProbDist r;
    r.w.assign(m.a.begin() + static_cast<std::size_t>(i) * m.dim,
               m.a.begin() + static_cast<std::size_t>(i + 1) * m.dim);
    return r;
  }
};

// State sequence X_1..X_m. States are 0-based in memory; the text format
// (io.hpp) is 1-based.
struct Trajectory {
  int dim = 0;
  std::vector<int> states;

  int length() const { return static_cast<int>(states.size()); }
};

// Diagnostics bundle for one chain: everything the sample-size bounds
// consume. Optional fields are absent when the chain does not support them
// (spectral_gap needs reversibility, cheeger needs d small enough for exact
// enumeration).
struct ChainDiagnostics {
  ProbDist stationary;
  double pi_min = 0.0;
  std::optional<double> spectral_gap;  // gamma = 1 - lambda_2, reversible only
  double pseudo_spectral_gap = 0.0;    // gamma_ps
  int pseudo_gap_argmax_k = 0;
  double dobrushin = 0.0;          // kappa(M)
  double dobrushin_squared = 0.0;  // kappa(M^2)
  std::optional<double> cheeger;   // Phi, exact enumeration (d <= 25)
  double pi_mu = 1.0;              // Pi_mu for the supplied initial law
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kDetailedBalanceTolerance = 1e-10;

// Accepts a raw square matrix whose rows each sum to 1 within `tolerance`,
// renormalizes every row to sum exactly 1, and rejects anything else.
inline StochasticMatrix validate_stochastic(const Matrix& raw,
                                            double tolerance = kRowSumTolerance) {
  const int d = raw.dim;
  if (d < 2 || raw.a.size() != static_cast<std::size_t>(d) * d)
    throw NotSquare("expected a square matrix with dim >= 2, got dim=" +
                    std::to_string(d));
  StochasticMatrix out{raw};
  for (int i = 0; i < d; ++i) {
    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
      const double v = raw(i, j);
      if (v < 0.0)
        throw NegativeEntry("entry (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") = " + std::to_string(v));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance)
      throw RowSumOutOfTolerance("row " + std::to_string(i + 1) + " sums to " +
                                 std::to_string(sum));
    for (int j = 0; j < d; ++j) out.m(i, j) = raw(i, j) / sum;
  }
  return out;
}

inline ProbDist validate_dist(const std::vector<double>& raw,
                              double tolerance = kRowSumTolerance) {
  double sum = 0.0;
  for (double v : raw) {
    if (v < 0.0) throw NegativeEntry("distribution entry " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance)
    throw RowSumOutOfTolerance("distribution sums to " + std::to_string(sum));
  ProbDist out{raw};
  for (double& v : out.w) v /= sum;
  return out;
}

inline Trajectory validate_trajectory(std::vector<int> states_zero_based, int d) {
  if (states_zero_based.empty())
    throw ParseError("trajectory must contain at least one state");
  for (int s : states_zero_based)
    if (s < 0 || s >= d)
      throw StateOutOfRange("state " + std::to_string(s + 1) +
                            " outside [1, " + std::to_string(d) + "]");
  return Trajectory{d, std::move(states_zero_based)};
}

// ---------------------------------------------------------------------------
// Ergodicity: strong connectivity of the positive-entry digraph plus
// aperiodicity (gcd of cycle lengths = 1). Equivalent to M^k > 0 entrywise
// for some k, without powering tiny entries into underflow.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> reachable(const StochasticMatrix& M, bool transpose) {
  const int d = M.dim();
  std::vector<int> seen(d, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < d; ++v) {
      const double w = transpose ? M(v, u) : M(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_ergodic(const StochasticMatrix& M) {
  const int d = M.dim();
  const std::vector<int> fwd = detail::reachable(M, false);
  const std::vector<int> bwd = detail::reachable(M, true);
  for (int i = 0; i < d; ++i)
    if (!fwd[i] || !bwd[i]) return false;
  // Aperiodicity: with BFS levels from state 0, the period divides
  // level(u) + 1 - level(v) for every edge (u, v); gcd over all edges is
  // the period of the (strongly connected) graph.
  std::vector<int> level(d, -1);
  std::vector<int> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v = 0; v < d; ++v)
      if (M(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      }
  }
  int period = 0;
  for (int u = 0; u < d; ++u)
    for (int v = 0; v < d; ++v)
      if (M(u, v) > 0.0)
        period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
  return period == 1;
}

// ---------------------------------------------------------------------------
// Stationary distribution: solve pi M = pi, sum(pi) = 1 as the linear system
// (M^T - I) x = 0 with one row replaced by the all-ones constraint. Exact and
// robust at the small d this toolkit targets; power iteration survives only
// as a test oracle.
// ---------------------------------------------------------------------------

inline ProbDist stationary_distribution(const StochasticMatrix& M) {
  if (!is_ergodic(M)) throw NotErgodic("chain is not ergodic");
  const int d = M.dim();
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = M(j, i) - (i == j ? 1.0 : 0.0);
  A.row(d - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  b(d - 1) = 1.0;
  Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  ProbDist pi;
  pi.w.resize(d);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    // Ergodic chains have strictly positive pi; clamp only fp dust.
    pi.w[i] = std::max(x(i), 0.0);
    sum += pi.w[i];
  }
  for (double& v : pi.w) v /= sum;
  return pi;
}

inline double pi_min(const ProbDist& pi) {
  return *std::min_element(pi.w.begin(), pi.w.end());
}

inline bool is_reversible(const StochasticMatrix& M, const ProbDist& pi,
                          double tolerance = kDetailedBalanceTolerance) {
  const int d = M.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (std::abs(pi[i] * M(i, j) - pi[j] * M(j, i)) > tolerance) return false;
  return true;
}

// Time reversal M*(i,j) = pi(j) M(j,i) / pi(i). Row-stochastic; an
// involution; equal to M exactly when M is reversible.
inline StochasticMatrix time_reversal(const StochasticMatrix& M,
                                      const ProbDist& pi) {
  const int d = M.dim();
  Matrix r(d);
  for (int i = 0; i < d; ++i) {
    if (pi[i] <= 0.0)
      throw ZeroStationaryMass("pi(" + std::to_string(i + 1) + ") = 0");
    for (int j = 0; j < d; ++j) r(i, j) = pi[j] * M(j, i) / pi[i];
  }
  return validate_stochastic(r, 1e-9);
}

// ---------------------------------------------------------------------------
// Norms. The learning metric is the max row l1 norm, written |||A|||; no 1/2
// factor anywhere (total-variation conventions differ by one — this toolkit
// fixes the plain l1 row sum).
// ---------------------------------------------------------------------------

inline double tv_matrix_norm(const Matrix& A) {
  double best = 0.0;
  for (int i = 0; i < A.dim; ++i) {
    double sum = 0.0;
    for (int j = 0; j < A.dim; ++j) sum += std::abs(A(i, j));
    best = std::max(best, sum);
  }
  return best;
}

// max_i ||A(i,.)||_p for p in [1, 2]; p = 1 agrees with tv_matrix_norm.
inline double p_row_norm(const Matrix& A, double p) {
  if (p < 1.0 || p > 2.0)
    throw OutOfRange("p must lie in [1, 2], got " + std::to_string(p));
  double best = 0.0;
  for (int i = 0; i < A.dim; ++i) {
    double sum = 0.0;
    for (int j = 0; j < A.dim; ++j) sum += std::pow(std::abs(A(i, j)), p);
    best = std::max(best, std::pow(sum, 1.0 / p));
  }
  return best;
}

// Elementwise max |A(i,j)| — the max-norm variant of the learning metric.
inline double max_norm(const Matrix& A) {
  double best = 0.0;
  for (double v : A.a) best = std::max(best, std::abs(v));
  return best;
}

inline double l1_distance(const ProbDist& x, const ProbDist& y) {
  double sum = 0.0;
  for (int i = 0; i < x.dim(); ++i) sum += std::abs(x[i] - y[i]);
  return sum;
}

// Pi_mu = sum_i mu(i)^2 / pi(i): the price of a non-stationary start.
// Equals 1 at mu = pi and never exceeds 1/pi_min.
inline double pi_mu(const ProbDist& mu, const ProbDist& pi) {
  double sum = 0.0;
  for (int i = 0; i < mu.dim(); ++i) {
    if (pi[i] <= 0.0)
      throw ZeroStationaryMass("pi(" + std::to_string(i + 1) + ") = 0");
    sum += mu[i] * mu[i] / pi[i];
  }
  return sum;
}

}  // namespace mcmx
