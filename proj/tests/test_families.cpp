#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/families.hpp"
#include "mcmx/spectral.hpp"

namespace {

mcmx::HEtaParams heta(int d, double eta, double eps, std::vector<int> tau) {
  mcmx::HEtaParams p;
  p.d = d;
  p.eta = eta;
  p.epsilon = eps;
  p.tau = std::move(tau);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Star family
// ---------------------------------------------------------------------------

TEST_CASE("star family center layout and stationary law") {
  const int d = 4;
  const double p_star = 0.1;
  const mcmx::StochasticMatrix M =
      mcmx::gp_perturbed(d, p_star, 0.0, {0, 0});
  REQUIRE(M.dim() == d + 1);
  // Satellite rows spread (1 - p*) uniformly and keep p* on the hub.
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      REQUIRE(M(i, j) == Catch::Approx(0.225).margin(1e-15));
    REQUIRE(M(i, d) == Catch::Approx(0.1).margin(1e-15));
  }
  // The unperturbed hub row coincides with the satellite rows.
  for (int j = 0; j < d; ++j)
    REQUIRE(M(d, j) == Catch::Approx(0.225).margin(1e-15));
  REQUIRE(M(d, d) == Catch::Approx(0.1).margin(1e-15));

  const mcmx::ProbDist closed = mcmx::gp_stationary_closed_form(
      mcmx::gp_perturbed_params(d, p_star, 0.0, {0, 0}));
  const mcmx::ProbDist solved = mcmx::stationary_distribution(M);
  for (int k = 0; k <= d; ++k)
    REQUIRE(closed[k] == Catch::Approx(solved[k]).margin(1e-10));
  // pi_k = (1-p*)^2/d + eta_k p*; at the center eta_k = (1-p*)/d.
  REQUIRE(closed[0] == Catch::Approx(0.2025 + 0.225 * 0.1).margin(1e-12));
  REQUIRE(closed[d] == Catch::Approx(p_star).margin(1e-15));
}

TEST_CASE("star family perturbation geometry") {
  const int d = 4;
  const double p_star = 0.1, eps = 0.02;
  const mcmx::StochasticMatrix M0 = mcmx::gp_perturbed(d, p_star, 0.0, {0, 0});
  const mcmx::StochasticMatrix Ma = mcmx::gp_perturbed(d, p_star, eps, {1, 0});
  const mcmx::StochasticMatrix Mb = mcmx::gp_perturbed(d, p_star, eps, {0, 1});

  SECTION("distance to the center is 16 eps in the TV matrix norm") {
    REQUIRE(mcmx::tv_matrix_norm(Ma.m - M0.m) ==
            Catch::Approx(16 * eps).margin(1e-12));
    REQUIRE(mcmx::tv_matrix_norm(Mb.m - M0.m) ==
            Catch::Approx(16 * eps).margin(1e-12));
  }

  SECTION("hub-row l1 separation scales as 64 eps / d per differing bit") {
    const mcmx::GpParams pa = mcmx::gp_perturbed_params(d, p_star, eps, {1, 0});
    const mcmx::GpParams pb = mcmx::gp_perturbed_params(d, p_star, eps, {0, 1});
    double l1 = 0.0;
    for (int k = 0; k <= d; ++k) l1 += std::abs(pa.eta[k] - pb.eta[k]);
    REQUIRE(l1 == Catch::Approx(64.0 * eps / d * 2).margin(1e-12));

    const mcmx::GpParams pc = mcmx::gp_perturbed_params(d, p_star, eps, {1, 1});
    l1 = 0.0;
    for (int k = 0; k <= d; ++k) l1 += std::abs(pa.eta[k] - pc.eta[k]);
    REQUIRE(l1 == Catch::Approx(64.0 * eps / d * 1).margin(1e-12));
  }

  SECTION("perturbed rows stay probability vectors") {
    for (int i = 0; i <= d; ++i) {
      double s = 0.0;
      for (int j = 0; j <= d; ++j) {
        REQUIRE(Ma(i, j) >= 0.0);
        s += Ma(i, j);
      }
      REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
    }
  }

  SECTION("parameter validation") {
    REQUIRE_THROWS_AS(mcmx::gp_perturbed_params(3, p_star, eps, {1, 0}),
                      mcmx::InvalidParams);
    REQUIRE_THROWS_AS(mcmx::gp_perturbed_params(d, p_star, 0.5, {1, 0}),
                      mcmx::InvalidParams);
    REQUIRE_THROWS_AS(mcmx::gp_perturbed_params(d, p_star, eps, {1, 0, 1}),
                      mcmx::InvalidParams);
    // p* must stay below 1/(d+2).
    REQUIRE_THROWS_AS(mcmx::gp_perturbed_params(d, 0.2, eps, {1, 0}),
                      mcmx::InvalidParams);
  }
}

TEST_CASE("divergence between hub rows: closed form and floor") {
  const int d = 4;
  const double p_star = 0.1, eps = 0.02;
  const mcmx::GpParams center = mcmx::gp_perturbed_params(d, p_star, 0.0, {0, 0});
  const mcmx::GpParams shifted = mcmx::gp_perturbed_params(d, p_star, eps, {1, 1});
  const double kl = mcmx::kl_divergence(shifted.eta, center.eta);
  // ((1-p*)/2) [(1+x) ln(1+x) + (1-x) ln(1-x)], x = 16 eps / (1-p*).
  REQUIRE(kl == Catch::Approx(0.05815260704850958).margin(1e-12));
  // The divergence sits strictly above 128 eps^2 for every admissible scale.
  for (double e : {0.005, 0.01, 0.02, 0.03}) {
    const mcmx::GpParams s = mcmx::gp_perturbed_params(d, p_star, e, {1, 0});
    const double v = mcmx::kl_divergence(s.eta, center.eta);
    REQUIRE(v > 128.0 * e * e);
  }
}

TEST_CASE("kl_divergence basics") {
  const mcmx::ProbDist p = mcmx::validate_dist({0.5, 0.5});
  const mcmx::ProbDist q = mcmx::validate_dist({0.25, 0.75});
  REQUIRE(mcmx::kl_divergence(p, p) == 0.0);
  REQUIRE(mcmx::kl_divergence(p, q) ==
          Catch::Approx(0.14384103622589042).margin(1e-14));
  REQUIRE(mcmx::kl_divergence(p, q) > 0.0);
  // Zero mass in p is fine; missing support in q is not.
  const mcmx::ProbDist sparse = mcmx::validate_dist({1.0, 0.0});
  REQUIRE(mcmx::kl_divergence(sparse, q) ==
          Catch::Approx(std::log(4.0)).margin(1e-14));
  REQUIRE_THROWS_AS(mcmx::kl_divergence(q, sparse), mcmx::SupportViolation);
}

// ---------------------------------------------------------------------------
// Exact path divergence
// ---------------------------------------------------------------------------

namespace {

// Two star chains at d = 3 that differ only in the hub row.
struct HubPair {
  mcmx::StochasticMatrix m1, m2;
  double hub_kl = 0.0;
  double p_star = 0.1;
};

HubPair hub_pair() {
  mcmx::GpParams a, b;
  a.d = b.d = 3;
  a.p_star = b.p_star = 0.1;
  a.eta = mcmx::validate_dist({0.4, 0.3, 0.2, 0.1});
  b.eta = mcmx::validate_dist({0.3, 0.35, 0.25, 0.1});
  HubPair out;
  out.m1 = mcmx::build_gp(a);
  out.m2 = mcmx::build_gp(b);
  out.hub_kl = mcmx::kl_divergence(a.eta, b.eta);
  return out;
}

}  // namespace

TEST_CASE("kl_words_exact vanishes for identical chains") {
  const HubPair pair = hub_pair();
  const mcmx::ProbDist mu =
      mcmx::validate_dist({0.25, 0.25, 0.25, 0.25});
  for (int m = 1; m <= 4; ++m)
    REQUIRE(mcmx::kl_words_exact(pair.m1, pair.m1, mu, m) ==
            Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("kl_words_exact matches the hub-occupation accounting") {
  // The two chains differ only in the hub row, and every row gives the hub
  // probability p*. So the path divergence is exactly
  // [mu(hub) + (m - 2) p*] * KL(hub rows) for m >= 2.
  const HubPair pair = hub_pair();
  const mcmx::ProbDist mu = mcmx::validate_dist({0.4, 0.3, 0.1, 0.2});
  REQUIRE(mcmx::kl_words_exact(pair.m1, pair.m2, mu, 1) ==
          Catch::Approx(0.0).margin(1e-15));
  for (int m = 2; m <= 5; ++m) {
    const double expected = (0.2 + (m - 2) * pair.p_star) * pair.hub_kl;
    REQUIRE(mcmx::kl_words_exact(pair.m1, pair.m2, mu, m) ==
            Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("path divergence tensorizes from the shared stationary-like start") {
  const HubPair pair = hub_pair();
  // Start from the satellite row itself: hub mass exactly p*.
  const mcmx::ProbDist p = mcmx::validate_dist({0.3, 0.3, 0.3, 0.1});
  for (int m = 2; m <= 6; ++m) {
    const double lhs = mcmx::kl_words_exact(pair.m1, pair.m2, p, m);
    REQUIRE(lhs <= pair.p_star * m * pair.hub_kl + 1e-12);
  }
}

TEST_CASE("kl_words_exact rejects oversized enumerations") {
  mcmx::Matrix u(7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) u(i, j) = 1.0 / 7.0;
  const mcmx::StochasticMatrix M = mcmx::validate_stochastic(u);
  const mcmx::ProbDist mu =
      mcmx::validate_dist(std::vector<double>(7, 1.0 / 7.0));
  REQUIRE_THROWS_AS(mcmx::kl_words_exact(M, M, mu, 3), mcmx::TooLargeForExact);

  const HubPair pair = hub_pair();
  const mcmx::ProbDist mu4 = mcmx::validate_dist({0.25, 0.25, 0.25, 0.25});
  REQUIRE_THROWS_AS(mcmx::kl_words_exact(pair.m1, pair.m2, mu4, 11),
                    mcmx::TooLargeForExact);
}

// ---------------------------------------------------------------------------
// Codebook
// ---------------------------------------------------------------------------

TEST_CASE("greedy codebook at trivial separation keeps every word") {
  const mcmx::Codebook cb = mcmx::varshamov_gilbert(4, 1);
  REQUIRE(cb.words.size() == 16u);
  REQUIRE(cb.words.front() == 0u);
  REQUIRE(cb.words.back() == 15u);
  REQUIRE(cb.bits(3) == std::vector<int>({1, 1, 0, 0}));
}

TEST_CASE("greedy codebook at distance two keeps the even-weight words") {
  const mcmx::Codebook cb = mcmx::varshamov_gilbert(10, 2);
  REQUIRE(cb.words.size() == 512u);
  for (std::uint64_t w : cb.words) REQUIRE(std::popcount(w) % 2 == 0);
}

TEST_CASE("codebook size clears the packing guarantee") {
  // Word length d/2 at separation d/16 must pack at least 2^{d/16} words.
  for (int d : {32, 48, 96}) {
    const std::size_t needed = std::size_t(1) << (d / 16);
    const mcmx::Codebook cb =
        mcmx::varshamov_gilbert(d / 2, d / 16, needed);
    REQUIRE(cb.words.size() == needed);
  }
}

TEST_CASE("codebook respects the pairwise separation") {
  const mcmx::Codebook cb = mcmx::varshamov_gilbert(10, 3);
  REQUIRE(cb.words.size() >= 2u);
  for (std::size_t a = 0; a < cb.words.size(); ++a)
    for (std::size_t b = a + 1; b < cb.words.size(); ++b)
      REQUIRE(mcmx::hamming_distance(cb.words[a], cb.words[b]) >= 3);
}

TEST_CASE("early stop is a prefix of the full greedy scan") {
  const mcmx::Codebook full = mcmx::varshamov_gilbert(10, 2);
  const mcmx::Codebook head = mcmx::varshamov_gilbert(10, 2, 37);
  REQUIRE(head.words.size() == 37u);
  for (std::size_t i = 0; i < head.words.size(); ++i)
    REQUIRE(head.words[i] == full.words[i]);
}

TEST_CASE("codebook parameter validation") {
  REQUIRE_THROWS_AS(mcmx::varshamov_gilbert(0, 1), mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::varshamov_gilbert(64, 1), mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::varshamov_gilbert(8, 9), mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::varshamov_gilbert(8, 0), mcmx::InvalidParams);
}

// ---------------------------------------------------------------------------
// Rim family
// ---------------------------------------------------------------------------

TEST_CASE("rim family structural invariants") {
  const mcmx::StochasticMatrix M =
      mcmx::build_heta(heta(12, 0.01, 0.1, {1, 0, 1, 0}));
  REQUIRE(M.dim() == 12);
  SECTION("symmetric, hence doubly stochastic with uniform stationary law") {
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        REQUIRE(M(i, j) == Catch::Approx(M(j, i)).margin(1e-15));
    const mcmx::ProbDist pi = mcmx::stationary_distribution(M);
    for (int i = 0; i < 12; ++i)
      REQUIRE(pi[i] == Catch::Approx(1.0 / 12.0).margin(1e-10));
    REQUIRE(mcmx::is_reversible(M, pi));
  }
  SECTION("lazy: every holding probability is at least one half") {
    for (int i = 0; i < 12; ++i) REQUIRE(M(i, i) >= 0.5);
  }
  SECTION("clique states talk to their own rim pair only") {
    // Clique state 0 reaches rim states 4 and 5; the marked group (tau = 1)
    // splits (1 + 4 eps) / 8 and (1 - 4 eps) / 8.
    REQUIRE(M(0, 4) == Catch::Approx((1 + 0.4) / 8).margin(1e-15));
    REQUIRE(M(0, 5) == Catch::Approx((1 - 0.4) / 8).margin(1e-15));
    // Unmarked group 1: clique state 1 with rim 6, 7 split evenly.
    REQUIRE(M(1, 6) == Catch::Approx(0.125).margin(1e-15));
    REQUIRE(M(1, 7) == Catch::Approx(0.125).margin(1e-15));
    // No cross-group rim contact.
    REQUIRE(M(0, 6) == 0.0);
    REQUIRE(M(1, 4) == 0.0);
  }
}

TEST_CASE("rim family parameter validation") {
  REQUIRE_THROWS_AS(mcmx::build_heta(heta(10, 0.01, 0.1, {1, 0, 1})),
                    mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::build_heta(heta(12, 0.5, 0.1, {1, 0, 1, 0})),
                    mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::build_heta(heta(12, 0.01, 0.2, {1, 0, 1, 0})),
                    mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::build_heta(heta(12, 0.01, 0.1, {1, 0})),
                    mcmx::InvalidParams);
  REQUIRE_THROWS_AS(mcmx::build_heta(heta(12, 0.01, 0.0, {1, 0, 1, 0})),
                    mcmx::InvalidParams);
}

TEST_CASE("marking patterns sit at TV matrix distance eps") {
  const double eps = 0.1;
  const mcmx::StochasticMatrix M00 =
      mcmx::build_heta(heta(12, 0.01, eps, {0, 0, 0, 0}));
  const mcmx::StochasticMatrix M10 =
      mcmx::build_heta(heta(12, 0.01, eps, {1, 0, 0, 0}));
  const mcmx::StochasticMatrix M11 =
      mcmx::build_heta(heta(12, 0.01, eps, {1, 1, 0, 0}));
  REQUIRE(mcmx::tv_matrix_norm(M10.m - M00.m) ==
          Catch::Approx(eps).margin(1e-12));
  REQUIRE(mcmx::tv_matrix_norm(M11.m - M00.m) ==
          Catch::Approx(eps).margin(1e-12));
  REQUIRE(mcmx::tv_matrix_norm(M11.m - M10.m) ==
          Catch::Approx(eps).margin(1e-12));
}

TEST_CASE("two-step contraction coefficient closed form") {
  const double eta = 0.01, eps = 0.1;
  SECTION("reference values at d = 12") {
    // No marked group: 1 - (eta/8)(1 + 1/(n-1)).
    REQUIRE(mcmx::heta_kappa_squared_closed_form(
                heta(12, eta, eps, {0, 0, 0, 0})) ==
            Catch::Approx(0.9983333333333333).margin(1e-15));
    // One marked group adds eps eta / 2.
    REQUIRE(mcmx::heta_kappa_squared_closed_form(
                heta(12, eta, eps, {0, 1, 0, 0})) ==
            Catch::Approx(0.9988333333333332).margin(1e-15));
    // Two or more marked groups: 1 - eta (1/8 - eps/2)(1 + 1/(n-1)).
    REQUIRE(mcmx::heta_kappa_squared_closed_form(
                heta(12, eta, eps, {1, 1, 1, 1})) ==
            Catch::Approx(0.999).margin(1e-15));
  }
  SECTION("brute force agreement and ceiling across dimensions") {
    const std::vector<std::vector<int>> patterns = {
        {0, 0, 0, 0}, {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 1, 1, 1}};
    for (const auto& tau : patterns) {
      const mcmx::HEtaParams p = heta(12, eta, eps, tau);
      const double brute =
          mcmx::dobrushin(mcmx::matrix_power(mcmx::build_heta(p), 2));
      const double closed = mcmx::heta_kappa_squared_closed_form(p);
      REQUIRE(brute == Catch::Approx(closed).margin(1e-12));
      REQUIRE(closed <= 1.0 - eta / 16.0 + 1e-15);
    }
    // One larger instance.
    const mcmx::HEtaParams p18 = heta(18, 0.015, 0.05, {1, 0, 0, 1, 0, 1});
    REQUIRE(mcmx::dobrushin(mcmx::matrix_power(mcmx::build_heta(p18), 2)) ==
            Catch::Approx(mcmx::heta_kappa_squared_closed_form(p18))
                .margin(1e-12));
  }
}

TEST_CASE("rim family conductance closed form") {
  for (double eta : {0.005, 0.01, 0.02}) {
    const mcmx::HEtaParams p = heta(12, eta, 0.1, {1, 0, 1, 1});
    const mcmx::StochasticMatrix M = mcmx::build_heta(p);
    const mcmx::ProbDist pi = mcmx::stationary_distribution(M);
    // n eta / (6 (n - 1)) with n = d/3 = 4.
    REQUIRE(mcmx::heta_conductance_closed_form(p) ==
            Catch::Approx(4.0 * eta / 18.0).margin(1e-15));
    REQUIRE(mcmx::cheeger(M, pi) ==
            Catch::Approx(mcmx::heta_conductance_closed_form(p))
                .margin(1e-12));
  }
}

TEST_CASE("isolated clique chain spectral gap") {
  // Off-diagonal eta/(n-1), diagonal 1 - eta: gap = eta n / (n - 1).
  const double eta = 0.02;
  const mcmx::StochasticMatrix C = mcmx::inner_clique_chain(12, eta);
  REQUIRE(C.dim() == 4);
  const mcmx::ProbDist pi = mcmx::stationary_distribution(C);
  const mcmx::SpectralReport r = mcmx::reversible_spectrum(C, pi);
  REQUIRE(r.gap.has_value());
  REQUIRE(*r.gap == Catch::Approx(eta * 4.0 / 3.0).margin(1e-12));
  REQUIRE_THROWS_AS(mcmx::inner_clique_chain(12, 0.05), mcmx::InvalidParams);
}
