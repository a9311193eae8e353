#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"
#include "mcmx/sampler.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// The smoothed maximum-likelihood learner: Mhat(i,j) = N_ij / N_i from one
// trajectory, with the uniform row 1/d substituted for states the trajectory
// never left (N_i = 0). Rows therefore sum to exactly 1.
// ---------------------------------------------------------------------------

struct LearnedChain {
  StochasticMatrix estimate;
  std::set<int> unvisited_states;  // 0-based state ids with N_i = 0
  int source_length = 0;
};

inline LearnedChain learn(const Trajectory& x, int d) {
  if (x.dim != d) throw StateOutOfRange("trajectory dimension mismatch");
  const CountSummary c = count_summary(x);
  Matrix est(d);
  LearnedChain out;
  for (int i = 0; i < d; ++i) {
    if (c.visits[i] > 0) {
      for (int j = 0; j < d; ++j)
        est(i, j) = static_cast<double>(c.transition(i, j)) / c.visits[i];
    } else {
      out.unvisited_states.insert(i);
      for (int j = 0; j < d; ++j) est(i, j) = 1.0 / d;
    }
  }
  out.estimate = validate_stochastic(est);
  out.source_length = x.length();
  return out;
}

enum class ErrorNorm { tv, max, p };

// Row-wise recovery error of the estimate against the truth under the
// selected norm; `p_value` only matters for ErrorNorm::p.
inline double learn_error(const StochasticMatrix& truth, const LearnedChain& learned,
                          ErrorNorm norm = ErrorNorm::tv, double p_value = 2.0) {
  if (truth.dim() != learned.estimate.dim())
    throw OutOfRange("dimension mismatch between truth and estimate");
  const Matrix diff = truth.m - learned.estimate.m;
  switch (norm) {
    case ErrorNorm::tv: return tv_matrix_norm(diff);
    case ErrorNorm::max: return max_norm(diff);
    case ErrorNorm::p: return p_row_norm(diff, p_value);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Sample-size calculators. All logarithms are natural; the generic "universal
// constant" formulations are replaced by the explicit constants the proofs
// actually produce (16 and 112), so every number here is checkable.
// ---------------------------------------------------------------------------

struct SampleSizeBound {
  long long m_tv_term = 0;      // ceil((16 d / (eps^2 pi_min)) ln(4 d^2 / delta))
  long long m_mixing_term = 0;  // ceil((112 / (gamma_ps pi_min)) ln(2 d sqrt(Pi_mu) / delta))
  long long m_required = 0;     // max of the two
  double epsilon = 0.0, delta = 0.0;
  int d = 0;
  double pi_min = 0.0, gamma_ps = 0.0, pi_mu = 1.0;
};

inline SampleSizeBound sample_size_upper(int d, double epsilon, double delta,
                                         double pi_min_value, double gamma_ps,
                                         double pi_mu_value) {
  if (d < 2) throw OutOfRange("d must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 2.0)) throw OutOfRange("epsilon must lie in (0, 2)");
  if (!(delta > 0.0 && delta < 1.0)) throw OutOfRange("delta must lie in (0, 1)");
  if (!(pi_min_value > 0.0 && pi_min_value <= 1.0 / d))
    throw OutOfRange("pi_min must lie in (0, 1/d]");
  if (!(gamma_ps > 0.0 && gamma_ps <= 1.0))
    throw OutOfRange("gamma_ps must lie in (0, 1]");
  if (!(pi_mu_value >= 1.0 && pi_mu_value <= 1.0 / pi_min_value + 1e-9))
    throw OutOfRange("Pi_mu must lie in [1, 1/pi_min]");
  SampleSizeBound b;
  b.d = d;
  b.epsilon = epsilon;
  b.delta = delta;
  b.pi_min = pi_min_value;
  b.gamma_ps = gamma_ps;
  b.pi_mu = pi_mu_value;
  b.m_tv_term = static_cast<long long>(
      std::ceil(16.0 * d / (epsilon * epsilon * pi_min_value) *
                std::log(4.0 * d * d / delta)));
  b.m_mixing_term = static_cast<long long>(
      std::ceil(112.0 / (gamma_ps * pi_min_value) *
                std::log(2.0 * d * std::sqrt(pi_mu_value) / delta)));
  b.m_required = std::max(b.m_tv_term, b.m_mixing_term);
  return b;
}

struct SampleSizeLower {
  double tv_term = 0.0;      // d (1 - 2 delta) ln 2 / (8192 eps^2 pi_min), delta = 1/10
  double mixing_term = 0.0;  // (d / (20 eta)) ln(d/3) with eta = gamma_ps
};

// Lower-bound thresholds from the adversarial families. The mixing term
// converts the rim-family parameter via eta = gamma_ps; the Theta(eta)
// relation hides constants, so this output is an order-of-magnitude
// reference, not a sharp bound.
inline SampleSizeLower sample_size_lower(int d, double epsilon,
                                         double pi_min_value, double gamma_ps) {
  if (d < 12 || d % 6 != 0) throw OutOfRange("d must be a multiple of 6, >= 12");
  if (!(epsilon > 0.0 && epsilon < 1.0 / 32.0))
    throw OutOfRange("epsilon must lie in (0, 1/32)");
  if (!(pi_min_value > 0.0 && pi_min_value <= 1.0 / d))
    throw OutOfRange("pi_min must lie in (0, 1/d]");
  if (!(gamma_ps > 0.0 && gamma_ps < 1.0 / 8.0))
    throw OutOfRange("gamma_ps must lie in (0, 1/8)");
  const double delta = 0.1;
  SampleSizeLower out;
  out.tv_term = d * (1.0 - 2.0 * delta) * std::log(2.0) /
                (8192.0 * epsilon * epsilon * pi_min_value);
  out.mixing_term = d / (20.0 * gamma_ps) * std::log(d / 3.0);
  return out;
}

// Matrix Freedman tail bound: P(||sum of martingale matrices|| >= eps) <=
// (d1 + d2) exp(-(eps^2/2) / (sigma^2 + R eps / 3)), clipped to [0,1].
inline double matrix_freedman_bound(int d1, int d2, double eps, double sigma2,
                                    double R) {
  if (eps < 0.0) throw OutOfRange("eps must be >= 0");
  if (!(sigma2 > 0.0)) throw OutOfRange("sigma^2 must be > 0");
  if (!(R > 0.0)) throw OutOfRange("R must be > 0");
  const double value =
      (d1 + d2) * std::exp(-(eps * eps / 2.0) / (sigma2 + R * eps / 3.0));
  return std::min(value, 1.0);
}

// The specialization the per-row tail argument instantiates: a 1 x d row
// martingale watched while state i holds N_i ~ n_i visits, with variance
// proxy 3 n_i, unit summand bound, and deviation eps n_i / sqrt(2d):
//   (d + 1) exp(-eps^2 n_i^2 / (2d (3 n_i + eps n_i / (3 sqrt(2d))))).
// Dominated by the simpler envelope 2 d exp(-eps^2 n_i / (8 d)) whenever
// eps <= 3 sqrt(2d) — the whole learning range.
inline double row_freedman_bound(int d, double n_i, double eps) {
  if (d < 2 || n_i <= 0.0 || eps < 0.0) throw OutOfRange("bad row bound inputs");
  const double value =
      (d + 1) *
      std::exp(-eps * eps * n_i * n_i /
               (2.0 * d * (3.0 * n_i + eps * n_i / (3.0 * std::sqrt(2.0 * d)))));
  return std::min(value, 1.0);
}

inline double row_freedman_envelope(int d, double n_i, double eps) {
  return std::min(2.0 * d * std::exp(-eps * eps * n_i / (8.0 * d)), 1.0);
}

// Trajectory length after which every visit count N_i concentrates inside
// [m pi_i / 2, 3 m pi_i / 2] with probability >= 1 - delta/2. Same formula
// as the mixing term of the sample-size bound.
inline long long visit_concentration_threshold(int d, double delta,
                                               double pi_min_value,
                                               double gamma_ps,
                                               double pi_mu_value) {
  return sample_size_upper(d, 1.0, delta, pi_min_value, gamma_ps, pi_mu_value)
      .m_mixing_term;
}

}  // namespace mcmx
