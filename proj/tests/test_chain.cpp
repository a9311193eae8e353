#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mcmx/chain.hpp"

namespace {

mcmx::Matrix raw2(double a, double b, double c, double d) {
  mcmx::Matrix m(2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

mcmx::StochasticMatrix lazy_two_state() {
  return mcmx::validate_stochastic(raw2(0.9, 0.1, 0.1, 0.9));
}

// 3-cycle with a drift: ergodic but not reversible.
mcmx::StochasticMatrix biased_cycle() {
  mcmx::Matrix m(3);
  for (int i = 0; i < 3; ++i) {
    m(i, (i + 1) % 3) = 0.7;
    m(i, (i + 2) % 3) = 0.2;
    m(i, i) = 0.1;
  }
  return mcmx::validate_stochastic(m);
}

}  // namespace

TEST_CASE("validate_stochastic rejects malformed input") {
  SECTION("negative entry") {
    REQUIRE_THROWS_AS(mcmx::validate_stochastic(raw2(1.1, -0.1, 0.5, 0.5)),
                      mcmx::NegativeEntry);
  }
  SECTION("row sum off by more than the tolerance") {
    REQUIRE_THROWS_AS(mcmx::validate_stochastic(raw2(0.6, 0.6, 0.5, 0.5)),
                      mcmx::RowSumOutOfTolerance);
  }
  SECTION("dimension below two") {
    mcmx::Matrix tiny(1);
    tiny(0, 0) = 1.0;
    REQUIRE_THROWS_AS(mcmx::validate_stochastic(tiny), mcmx::NotSquare);
  }
  SECTION("storage size inconsistent with dim") {
    mcmx::Matrix broken(2);
    broken.a.pop_back();
    REQUIRE_THROWS_AS(mcmx::validate_stochastic(broken), mcmx::NotSquare);
  }
}

TEST_CASE("validate_stochastic renormalizes rows to sum exactly one") {
  mcmx::Matrix m = raw2(0.3 + 1e-12, 0.7, 0.25, 0.75);
  const mcmx::StochasticMatrix M = mcmx::validate_stochastic(m);
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j) s += M(i, j);
    REQUIRE(s == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("validate_dist rejects and renormalizes") {
  REQUIRE_THROWS_AS(mcmx::validate_dist({0.5, -0.5, 1.0}), mcmx::NegativeEntry);
  REQUIRE_THROWS_AS(mcmx::validate_dist({0.5, 0.2}), mcmx::RowSumOutOfTolerance);
  const mcmx::ProbDist p = mcmx::validate_dist({0.25 + 1e-12, 0.75});
  REQUIRE(p[0] + p[1] == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("validate_trajectory enforces the state range") {
  REQUIRE_THROWS_AS(mcmx::validate_trajectory({}, 2), mcmx::ParseError);
  REQUIRE_THROWS_AS(mcmx::validate_trajectory({0, 2}, 2), mcmx::StateOutOfRange);
  REQUIRE_THROWS_AS(mcmx::validate_trajectory({-1}, 2), mcmx::StateOutOfRange);
  const mcmx::Trajectory x = mcmx::validate_trajectory({0, 1, 0}, 2);
  REQUIRE(x.length() == 3);
  REQUIRE(x.dim == 2);
}

TEST_CASE("is_ergodic detects periodicity and reducibility") {
  REQUIRE(mcmx::is_ergodic(lazy_two_state()));
  REQUIRE(mcmx::is_ergodic(biased_cycle()));

  // Pure flip chain: irreducible but period 2.
  const mcmx::StochasticMatrix flip =
      mcmx::validate_stochastic(raw2(0.0, 1.0, 1.0, 0.0));
  REQUIRE_FALSE(mcmx::is_ergodic(flip));

  // Identity: aperiodic but reducible.
  const mcmx::StochasticMatrix id =
      mcmx::validate_stochastic(raw2(1.0, 0.0, 0.0, 1.0));
  REQUIRE_FALSE(mcmx::is_ergodic(id));

  // Absorbing target state: reachable one way only.
  const mcmx::StochasticMatrix absorbing =
      mcmx::validate_stochastic(raw2(0.5, 0.5, 0.0, 1.0));
  REQUIRE_FALSE(mcmx::is_ergodic(absorbing));
}

TEST_CASE("stationary_distribution matches the two-state closed form") {
  // P(0->1) = a, P(1->0) = b gives pi = (b, a) / (a + b).
  const double a = 0.2, b = 0.1;
  const mcmx::StochasticMatrix M =
      mcmx::validate_stochastic(raw2(1 - a, a, b, 1 - b));
  const mcmx::ProbDist pi = mcmx::stationary_distribution(M);
  REQUIRE(pi[0] == Catch::Approx(1.0 / 3.0).margin(1e-12));
  REQUIRE(pi[1] == Catch::Approx(2.0 / 3.0).margin(1e-12));
  REQUIRE(mcmx::pi_min(pi) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("stationary_distribution satisfies pi M = pi") {
  const mcmx::StochasticMatrix M = biased_cycle();
  const mcmx::ProbDist pi = mcmx::stationary_distribution(M);
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += pi[i] * M(i, j);
    REQUIRE(s == Catch::Approx(pi[j]).margin(1e-12));
  }
}

TEST_CASE("stationary_distribution rejects non-ergodic chains") {
  const mcmx::StochasticMatrix flip =
      mcmx::validate_stochastic(raw2(0.0, 1.0, 1.0, 0.0));
  REQUIRE_THROWS_AS(mcmx::stationary_distribution(flip), mcmx::NotErgodic);
}

TEST_CASE("reversibility check and time reversal") {
  const mcmx::StochasticMatrix sym = lazy_two_state();
  const mcmx::ProbDist pi_sym = mcmx::stationary_distribution(sym);
  REQUIRE(mcmx::is_reversible(sym, pi_sym));

  const mcmx::StochasticMatrix cyc = biased_cycle();
  const mcmx::ProbDist pi_cyc = mcmx::stationary_distribution(cyc);
  REQUIRE_FALSE(mcmx::is_reversible(cyc, pi_cyc));

  SECTION("reversal of a reversible chain is itself") {
    const mcmx::StochasticMatrix r = mcmx::time_reversal(sym, pi_sym);
    REQUIRE(mcmx::max_norm(r.m - sym.m) < 1e-12);
  }
  SECTION("reversal is an involution") {
    const mcmx::StochasticMatrix r = mcmx::time_reversal(cyc, pi_cyc);
    const mcmx::StochasticMatrix rr = mcmx::time_reversal(r, pi_cyc);
    REQUIRE(mcmx::max_norm(rr.m - cyc.m) < 1e-12);
    // The reversal runs the cycle the other way, so it differs from M.
    REQUIRE(mcmx::max_norm(r.m - cyc.m) > 0.1);
  }
}

TEST_CASE("matrix norms") {
  // Uniform rows minus identity at d = 4: each row l1 = 2 (1 - 1/d) = 1.5.
  const int d = 4;
  mcmx::Matrix diff(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) diff(i, j) = 1.0 / d - (i == j ? 1.0 : 0.0);
  REQUIRE(mcmx::tv_matrix_norm(diff) == Catch::Approx(1.5).margin(1e-15));
  REQUIRE(mcmx::max_norm(diff) == Catch::Approx(0.75).margin(1e-15));
  // p = 1 coincides with the TV matrix norm.
  REQUIRE(mcmx::p_row_norm(diff, 1.0) ==
          Catch::Approx(mcmx::tv_matrix_norm(diff)).margin(1e-15));
  // p = 2: each row is (0.75, -0.25, -0.25, -0.25) up to order, l2 = sqrt(3)/2.
  REQUIRE(mcmx::p_row_norm(diff, 2.0) ==
          Catch::Approx(0.8660254037844386).margin(1e-15));
  REQUIRE_THROWS_AS(mcmx::p_row_norm(diff, 0.5), mcmx::OutOfRange);
  REQUIRE_THROWS_AS(mcmx::p_row_norm(diff, 3.0), mcmx::OutOfRange);
}

TEST_CASE("l1_distance between distributions") {
  const mcmx::ProbDist x = mcmx::validate_dist({0.5, 0.5});
  const mcmx::ProbDist y = mcmx::validate_dist({0.25, 0.75});
  REQUIRE(mcmx::l1_distance(x, y) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(mcmx::l1_distance(x, x) == 0.0);
}

TEST_CASE("pi_mu start penalty") {
  const mcmx::ProbDist pi = mcmx::validate_dist({1.0 / 3.0, 2.0 / 3.0});
  // Stationary start: penalty exactly 1.
  REQUIRE(mcmx::pi_mu(pi, pi) == Catch::Approx(1.0).margin(1e-12));
  // Point mass on the lightest state: the worst case 1 / pi_min.
  const mcmx::ProbDist point = mcmx::validate_dist({1.0, 0.0});
  REQUIRE(mcmx::pi_mu(point, pi) == Catch::Approx(3.0).margin(1e-12));
  // Any start lies in [1, 1/pi_min].
  const mcmx::ProbDist mid = mcmx::validate_dist({0.6, 0.4});
  const double v = mcmx::pi_mu(mid, pi);
  REQUIRE(v >= 1.0);
  REQUIRE(v <= 3.0 + 1e-12);
}
