#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// Family 1: the star-like class on d+1 states. Rows 1..d all equal the same
// distribution p = (p_1, ..., p_d, p_star) with p_k = (1 - p_star)/d; row
// d+1 is a free distribution eta with eta(d+1) = p_star. All the learning
// difficulty hides in row d+1, which is visited with stationary probability
// exactly p_star.
// ---------------------------------------------------------------------------

struct GpParams {
  int d = 0;          // the class lives on d + 1 states
  double p_star = 0.0;
  ProbDist eta;       // d + 1 entries, last = p_star

  void validate() const {
    if (d < 2) throw InvalidParams("d must be >= 2");
    if (!(p_star > 0.0 && p_star < 1.0 / (d + 2)))
      throw InvalidParams("p_star must lie in (0, 1/(d+2))");
    if (eta.dim() != d + 1) throw InvalidParams("eta must have d + 1 entries");
    if (std::abs(eta[d] - p_star) > 1e-12)
      throw InvalidParams("eta(d+1) must equal p_star");
  }
};

inline StochasticMatrix build_gp(const GpParams& params) {
  params.validate();
  const int d = params.d;
  Matrix m(d + 1);
  const double pk = (1.0 - params.p_star) / d;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = pk;
    m(i, d) = params.p_star;
  }
  for (int j = 0; j <= d; ++j) m(d, j) = params.eta[j];
  return validate_stochastic(m);
}

// Stationary law in closed form: pi_k = (1-p*)^2/d + eta_k p*, pi_{d+1} = p*.
inline ProbDist gp_stationary_closed_form(const GpParams& params) {
  const int d = params.d;
  std::vector<double> pi(d + 1);
  for (int k = 0; k < d; ++k)
    pi[k] = (1.0 - params.p_star) * (1.0 - params.p_star) / d +
            params.eta[k] * params.p_star;
  pi[d] = params.p_star;
  return validate_dist(pi);
}

// The codebook member M_sigma: row d+1 carries paired perturbations
//   eta(sigma) = ((1-p* + 16 s_1 eps)/d, (1-p* - 16 s_1 eps)/d, ...)
// with s_j = +1 for bit 1 and -1 for bit 0. d must be even; every entry must
// stay inside [0, 1].
inline GpParams gp_perturbed_params(int d, double p_star, double epsilon,
                                    const std::vector<int>& sigma_bits) {
  if (d < 2 || d % 2 != 0) throw InvalidParams("d must be even and >= 2");
  if (!(epsilon >= 0.0 && epsilon < 1.0 / 32.0))
    throw InvalidParams("epsilon must lie in [0, 1/32)");
  if (static_cast<int>(sigma_bits.size()) != d / 2)
    throw InvalidParams("sigma must have d/2 bits");
  std::vector<double> eta(d + 1);
  for (int j = 0; j < d / 2; ++j) {
    const int s = sigma_bits[j] ? +1 : -1;
    eta[2 * j] = (1.0 - p_star + 16.0 * s * epsilon) / d;
    eta[2 * j + 1] = (1.0 - p_star - 16.0 * s * epsilon) / d;
    if (eta[2 * j] < 0.0 || eta[2 * j] > 1.0 || eta[2 * j + 1] < 0.0 ||
        eta[2 * j + 1] > 1.0)
      throw PerturbationOutOfSimplex("eta entry left [0,1] at pair " +
                                     std::to_string(j + 1));
  }
  eta[d] = p_star;
  GpParams p{d, p_star, ProbDist{std::move(eta)}};
  p.validate();
  return p;
}

inline StochasticMatrix gp_perturbed(int d, double p_star, double epsilon,
                                     const std::vector<int>& sigma_bits) {
  return build_gp(gp_perturbed_params(d, p_star, epsilon, sigma_bits));
}

// ---------------------------------------------------------------------------
// KL machinery
// ---------------------------------------------------------------------------

// KL(p || q) = sum p_i ln(p_i / q_i), with 0 ln 0 = 0. Requires
// support(p) within support(q).
inline double kl_divergence(const ProbDist& p, const ProbDist& q) {
  if (p.dim() != q.dim()) throw SupportViolation("dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0)
      throw SupportViolation("q(" + std::to_string(i + 1) +
                             ") = 0 inside support(p)");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

// Exact KL between the two length-m word distributions of chains M1 (started
// from mu1) and M2 (started from mu2): sum over all d^m words w of
// P1(w) ln(P1(w)/P2(w)). Enumeration is the point — this is the oracle the
// tensorization inequality is checked against — so the word count is capped.
inline double kl_words_exact(const StochasticMatrix& M1, const StochasticMatrix& M2,
                             const ProbDist& mu1, const ProbDist& mu2, int m) {
  const int d = M1.dim();
  if (M2.dim() != d || mu1.dim() != d || mu2.dim() != d)
    throw SupportViolation("dimension mismatch");
  if (m < 1) throw OutOfRange("word length must be >= 1");
  double words = std::pow(static_cast<double>(d), m);
  if (d > 6 || m > 10 || words > 2e7)
    throw TooLargeForExact("word enumeration capped at d <= 6, m <= 10");

  // Odometer over words; probabilities updated incrementally per digit would
  // complicate support handling, and the full recompute is still cheap at
  // this size.
  std::vector<int> w(m, 0);
  double total = 0.0;
  for (;;) {
    double p1 = mu1[w[0]], p2 = mu2[w[0]];
    for (int t = 0; t + 1 < m && p1 > 0.0; ++t) {
      p1 *= M1(w[t], w[t + 1]);
      p2 *= M2(w[t], w[t + 1]);
    }
    if (p1 > 0.0) {
      if (p2 == 0.0) throw SupportViolation("word with P1 > 0 but P2 = 0");
      total += p1 * std::log(p1 / p2);
    }
    int pos = m - 1;
    while (pos >= 0 && ++w[pos] == d) w[pos--] = 0;
    if (pos < 0) break;
  }
  return total;
}

// Shared-start convenience overload.
inline double kl_words_exact(const StochasticMatrix& M1, const StochasticMatrix& M2,
                             const ProbDist& mu, int m) {
  return kl_words_exact(M1, M2, mu, mu, m);
}

// ---------------------------------------------------------------------------
// Varshamov-Gilbert codebook: greedy lexicographic packing of {0,1}^n with
// pairwise Hamming distance >= min_dist. Deterministic; the greedy count at
// these sizes comfortably exceeds the 2^{n/8} guarantee. `max_words` stops
// the scan once enough words are packed (the first k greedy words do not
// depend on when the scan stops).
// ---------------------------------------------------------------------------

struct Codebook {
  std::vector<std::uint64_t> words;  // bit j of word w = coordinate j
  int n = 0;
  int min_distance = 0;

  std::vector<int> bits(std::size_t idx) const {
    std::vector<int> out(n);
    for (int j = 0; j < n; ++j) out[j] = (words[idx] >> j) & 1u;
    return out;
  }
};

inline Codebook varshamov_gilbert(int n, int min_dist,
                                  std::optional<std::size_t> max_words = {}) {
  if (n < 1 || n > 63) throw InvalidParams("word length must lie in [1, 63]");
  if (min_dist < 1 || min_dist > n)
    throw InvalidParams("min_dist must lie in [1, n]");
  Codebook cb;
  cb.n = n;
  cb.min_distance = min_dist;
  for (std::uint64_t w = 0; w < (1ull << n); ++w) {
    bool ok = true;
    for (std::uint64_t kept : cb.words)
      if (std::popcount(kept ^ w) < min_dist) {
        ok = false;
        break;
      }
    if (ok) {
      cb.words.push_back(w);
      if (max_words && cb.words.size() >= *max_words) break;
    }
  }
  return cb;
}

inline int hamming_distance(std::uint64_t a, std::uint64_t b) {
  return std::popcount(a ^ b);
}

// ---------------------------------------------------------------------------
// Family 2: the two-tier rim class on d = 6k states. States 1..d/3 form a
// near-uniform clique (diagonal 3/4 - eta, off-diagonal eta/(d/3 - 1)); each
// clique state i is tethered to its own pair of sticky rim states with exit
// probabilities (1 +- 4 tau_i eps)/8 and matching rim holds (7 -+ 4 tau_i
// eps)/8. Symmetric by construction, so doubly stochastic, reversible, with
// uniform stationary law; every diagonal exceeds 1/2, so the spectrum is
// nonnegative.
// ---------------------------------------------------------------------------

struct HEtaParams {
  int d = 0;            // 6k, k >= 2
  double eta = 0.0;     // (0, 1/48)
  double epsilon = 0.0; // (0, 1/8]
  std::vector<int> tau; // d/3 bits

  void validate() const {
    if (d < 12 || d % 6 != 0)
      throw InvalidParams("d must be a multiple of 6, at least 12");
    if (!(eta > 0.0 && eta < 1.0 / 48.0))
      throw InvalidParams("eta must lie in (0, 1/48)");
    if (!(epsilon > 0.0 && epsilon <= 1.0 / 8.0))
      throw InvalidParams("epsilon must lie in (0, 1/8]");
    if (static_cast<int>(tau.size()) != d / 3)
      throw InvalidParams("tau must have d/3 bits");
    for (int b : tau)
      if (b != 0 && b != 1) throw InvalidParams("tau entries must be bits");
  }
};

inline StochasticMatrix build_heta(const HEtaParams& params) {
  params.validate();
  const int d = params.d, n = d / 3;
  const double eta = params.eta, eps = params.epsilon;
  Matrix m(d);
  const double off = eta / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = (i == j) ? 0.75 - eta : off;
    const double bump = 4.0 * params.tau[i] * eps;
    const int plus = n + 2 * i, minus = n + 2 * i + 1;
    m(i, plus) = (1.0 + bump) / 8.0;
    m(i, minus) = (1.0 - bump) / 8.0;
    m(plus, i) = (1.0 + bump) / 8.0;
    m(minus, i) = (1.0 - bump) / 8.0;
    m(plus, plus) = (7.0 - bump) / 8.0;
    m(minus, minus) = (7.0 + bump) / 8.0;
  }
  return validate_stochastic(m);
}

// kappa(M^2) in closed form. The maximizing row pair of M^2 is a pair of rim
// states from two different tether groups; the attained value depends on how
// many groups are perturbed:
//   sum tau = 0 :  1 - (eta/8)(1 + 1/(d/3-1))
//   sum tau = 1 :  1 - (eta/8)(1 + 1/(d/3-1)) + eps eta / 2
//   sum tau >= 2:  1 - eta (1/8 - eps/2)(1 + 1/(d/3-1))
// (with one perturbed group the two best rows sit in the same group and the
// cross term loses its 1/(d/3-1) share). Verified against brute force to
// ~2e-16 across d in {12, 18, 24}; always <= 1 - eta/16 in the valid range.
inline double heta_kappa_squared_closed_form(const HEtaParams& params) {
  params.validate();
  const int n = params.d / 3;
  const double eta = params.eta, eps = params.epsilon;
  int weight = 0;
  for (int b : params.tau) weight += b;
  const double base = 1.0 - (eta / 8.0) * (1.0 + 1.0 / (n - 1));
  if (weight == 0) return base;
  if (weight == 1) return base + eps * eta / 2.0;
  return 1.0 - eta * (0.125 - eps / 2.0) * (1.0 + 1.0 / (n - 1));
}

// The clique watched on its own: diagonal 1 - eta, off-diagonal eta/(d/3-1).
// Its second eigenvalue is 1 - eta(1 + 1/(d/3-1)).
inline StochasticMatrix inner_clique_chain(int d, double eta) {
  if (d < 12 || d % 6 != 0)
    throw InvalidParams("d must be a multiple of 6, at least 12");
  if (!(eta > 0.0 && eta < 1.0 / 48.0))
    throw InvalidParams("eta must lie in (0, 1/48)");
  const int n = d / 3;
  Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = (i == j) ? 1.0 - eta : eta / (n - 1);
  return validate_stochastic(m);
}

// True conductance of the rim family under exact enumeration: the minimizing
// cut takes half the tether groups whole (clique state plus its two rim
// states), so Phi = (d/3) eta / (6 (d/3 - 1)), independent of eps and tau.
// The 3 eta figure quoted alongside this family is not attained by any set;
// verify-lemmas reports that comparison honestly.
inline double heta_conductance_closed_form(const HEtaParams& params) {
  params.validate();
  const int n = params.d / 3;
  return n * params.eta / (6.0 * (n - 1));
}

}  // namespace mcmx
