// mcmx — command-line surface for the Markov chain learning toolkit.
//
// Exit codes: 0 success, 1 domain error (error name on stderr), 2 usage
// error. verify-lemmas additionally exits 1 when any check fails.

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"
#include "mcmx/families.hpp"
#include "mcmx/io.hpp"
#include "mcmx/learner.hpp"
#include "mcmx/lemma_checks.hpp"
#include "mcmx/risk.hpp"
#include "mcmx/sampler.hpp"
#include "mcmx/spectral.hpp"

namespace {

int g_exit = 0;

void write_to(const std::string& path,
              const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
  } else {
    mcmx::with_output_file(path, fn);
  }
}

std::vector<int> parse_bits(const std::string& s) {
  std::vector<int> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw mcmx::ParseError(std::string("bit string may contain only 0/1, got '") +
                             c + "'");
    bits.push_back(c - '0');
  }
  return bits;
}

std::string bit_validator(const std::string& s) {
  for (char c : s)
    if (c != '0' && c != '1') return "expected a string of 0/1 bits";
  return {};
}

mcmx::StochasticMatrix load_chain(const std::string& path) {
  return mcmx::with_input_file(
      path, [](std::istream& is) { return mcmx::read_stochastic(is); });
}

mcmx::ProbDist load_dist(const std::string& path) {
  return mcmx::with_input_file(
      path, [](std::istream& is) { return mcmx::read_dist(is); });
}

void print_diagnostics(std::ostream& os, const mcmx::ChainDiagnostics& diag) {
  mcmx::kv(os, "pi_min", diag.pi_min);
  mcmx::kv(os, "stationary", diag.stationary);
  if (diag.spectral_gap) mcmx::kv(os, "gamma", *diag.spectral_gap);
  mcmx::kv(os, "gamma_ps", diag.pseudo_spectral_gap);
  mcmx::kv(os, "gamma_ps_argmax_k",
           static_cast<long long>(diag.pseudo_gap_argmax_k));
  mcmx::kv(os, "kappa", diag.dobrushin);
  mcmx::kv(os, "kappa_squared", diag.dobrushin_squared);
  if (diag.cheeger) mcmx::kv(os, "cheeger", *diag.cheeger);
  mcmx::kv(os, "pi_mu", diag.pi_mu);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcmx: single-trajectory Markov chain learning toolkit"};
  app.require_subcommand(1);

  // ---- sample -------------------------------------------------------------
  auto* sample = app.add_subcommand(
      "sample", "Simulate a trajectory from a chain file");
  struct {
    std::string chain, initial_law, out;
    int m = 0;
    std::uint64_t seed = 0;
  } sample_args;
  sample->add_option("--chain", sample_args.chain, "transition matrix file")
      ->required();
  sample->add_option("--m", sample_args.m, "trajectory length")->required();
  sample->add_option("--seed", sample_args.seed, "RNG seed")->required();
  sample->add_option("--initial-law", sample_args.initial_law,
                     "distribution file (default: stationary law)");
  sample->add_option("--out", sample_args.out, "output file (default: stdout)");
  sample->callback([&] {
    const mcmx::StochasticMatrix M = load_chain(sample_args.chain);
    const mcmx::ProbDist mu = sample_args.initial_law.empty()
                                  ? mcmx::stationary_distribution(M)
                                  : load_dist(sample_args.initial_law);
    const mcmx::Trajectory x =
        mcmx::sample_trajectory(M, mu, sample_args.m, sample_args.seed);
    write_to(sample_args.out,
             [&](std::ostream& os) { mcmx::write_trajectory(os, x); });
  });

  // ---- learn --------------------------------------------------------------
  auto* learn_cmd = app.add_subcommand(
      "learn", "Estimate a transition matrix from a trajectory file");
  struct {
    std::string trajectory, out;
    int d = 0;
  } learn_args;
  learn_cmd
      ->add_option("--trajectory", learn_args.trajectory, "trajectory file")
      ->required();
  learn_cmd->add_option("--d", learn_args.d, "state-space size")->required();
  learn_cmd->add_option("--out", learn_args.out,
                        "output matrix file (default: stdout)");
  learn_cmd->callback([&] {
    const mcmx::Trajectory x = mcmx::with_input_file(
        learn_args.trajectory,
        [&](std::istream& is) { return mcmx::read_trajectory(is, learn_args.d); });
    const mcmx::LearnedChain fit = mcmx::learn(x, learn_args.d);
    if (!fit.unvisited_states.empty())
      std::cerr << "note: " << fit.unvisited_states.size()
                << " state(s) unvisited; their rows default to uniform\n";
    write_to(learn_args.out,
             [&](std::ostream& os) { mcmx::write_matrix(os, fit.estimate); });
  });

  // ---- diagnose -----------------------------------------------------------
  auto* diagnose = app.add_subcommand(
      "diagnose", "Mixing diagnostics of a chain file (key=value lines)");
  struct {
    std::string chain, initial_law;
  } diag_args;
  diagnose->add_option("--chain", diag_args.chain, "transition matrix file")
      ->required();
  diagnose->add_option("--initial-law", diag_args.initial_law,
                       "distribution file for the Pi_mu start penalty");
  diagnose->callback([&] {
    const mcmx::StochasticMatrix M = load_chain(diag_args.chain);
    std::optional<mcmx::ProbDist> mu;
    if (!diag_args.initial_law.empty()) mu = load_dist(diag_args.initial_law);
    print_diagnostics(std::cout, mcmx::compute_diagnostics(M, mu));
  });

  // ---- family -------------------------------------------------------------
  auto* family = app.add_subcommand(
      "family", "Construct an adversarial family member");
  family->require_subcommand(1);

  auto* fam_gp = family->add_subcommand(
      "gp", "Star family: d identical rows plus one perturbable hub row");
  struct {
    int d = 0;
    double p_star = 0.0, eps = 0.0;
    std::string sigma, out;
  } gp_args;
  fam_gp->add_option("--d", gp_args.d, "number of non-hub states (even)")
      ->required();
  fam_gp->add_option("--p-star", gp_args.p_star, "hub return mass")->required();
  fam_gp->add_option("--eps", gp_args.eps,
                     "perturbation scale (0 gives the family center)")
      ->required();
  fam_gp->add_option("--sigma", gp_args.sigma, "d/2 sign bits, e.g. 1010")
      ->required()
      ->check(CLI::Validator(bit_validator, "BITS"));
  fam_gp->add_option("--out", gp_args.out, "matrix output file");
  fam_gp->callback([&] {
    const std::vector<int> sigma = parse_bits(gp_args.sigma);
    const mcmx::GpParams params =
        mcmx::gp_perturbed_params(gp_args.d, gp_args.p_star, gp_args.eps, sigma);
    const mcmx::StochasticMatrix M = mcmx::build_gp(params);
    if (!gp_args.out.empty())
      mcmx::with_output_file(gp_args.out,
                             [&](std::ostream& os) { mcmx::write_matrix(os, M); });
    const mcmx::ProbDist pi = mcmx::gp_stationary_closed_form(params);
    mcmx::kv(std::cout, "d", static_cast<long long>(gp_args.d));
    mcmx::kv(std::cout, "p_star", gp_args.p_star);
    mcmx::kv(std::cout, "epsilon", gp_args.eps);
    mcmx::kv(std::cout, "stationary", pi);
    mcmx::kv(std::cout, "pi_min", mcmx::pi_min(pi));
    mcmx::kv(std::cout, "tv_to_center", 16.0 * gp_args.eps);
    const double x = 16.0 * gp_args.eps / (1.0 - gp_args.p_star);
    mcmx::kv(std::cout, "kl_to_center",
             0.5 * (1.0 - gp_args.p_star) *
                 ((1.0 + x) * std::log1p(x) + (1.0 - x) * std::log1p(-x)));
    if (gp_args.out.empty()) mcmx::write_matrix(std::cout, M);
  });

  auto* fam_heta = family->add_subcommand(
      "heta", "Rim family: slow clique with sticky two-state tethers");
  struct {
    int d = 0;
    double eta = 0.0, eps = 0.0;
    std::string tau, out;
  } heta_args;
  fam_heta->add_option("--d", heta_args.d, "state-space size (6k, k >= 2)")
      ->required();
  fam_heta->add_option("--eta", heta_args.eta, "clique escape mass")->required();
  fam_heta->add_option("--eps", heta_args.eps, "tether tilt")->required();
  fam_heta->add_option("--tau", heta_args.tau, "d/3 tilt bits, e.g. 1111")
      ->required()
      ->check(CLI::Validator(bit_validator, "BITS"));
  fam_heta->add_option("--out", heta_args.out, "matrix output file");
  fam_heta->callback([&] {
    mcmx::HEtaParams params;
    params.d = heta_args.d;
    params.eta = heta_args.eta;
    params.epsilon = heta_args.eps;
    params.tau = parse_bits(heta_args.tau);
    const mcmx::StochasticMatrix M = mcmx::build_heta(params);
    if (!heta_args.out.empty())
      mcmx::with_output_file(heta_args.out,
                             [&](std::ostream& os) { mcmx::write_matrix(os, M); });
    long long weight = 0;
    for (int b : params.tau) weight += b;
    mcmx::kv(std::cout, "d", static_cast<long long>(params.d));
    mcmx::kv(std::cout, "eta", params.eta);
    mcmx::kv(std::cout, "epsilon", params.epsilon);
    mcmx::kv(std::cout, "tau_weight", weight);
    mcmx::kv(std::cout, "pi_min", 1.0 / params.d);
    mcmx::kv(std::cout, "kappa_squared",
             mcmx::heta_kappa_squared_closed_form(params));
    mcmx::kv(std::cout, "cheeger", mcmx::heta_conductance_closed_form(params));
    if (heta_args.out.empty()) mcmx::write_matrix(std::cout, M);
  });

  // ---- bounds -------------------------------------------------------------
  auto* bounds = app.add_subcommand(
      "bounds", "Sample-size thresholds from measured diagnostics");
  struct {
    int d = 0;
    double eps = 0.0, delta = 0.0, pi_min = 0.0, gamma_ps = 0.0, pi_mu = 1.0;
  } bounds_args;
  bounds->add_option("--d", bounds_args.d, "state-space size")->required();
  bounds->add_option("--eps", bounds_args.eps, "target accuracy")->required();
  bounds->add_option("--delta", bounds_args.delta, "failure probability")
      ->required();
  bounds->add_option("--pi-min", bounds_args.pi_min, "minimum stationary mass")
      ->required();
  bounds->add_option("--gamma-ps", bounds_args.gamma_ps, "pseudo-spectral gap")
      ->required();
  bounds->add_option("--pi-mu", bounds_args.pi_mu,
                     "non-stationary start penalty (default 1)");
  bounds->callback([&] {
    const mcmx::SampleSizeBound ub = mcmx::sample_size_upper(
        bounds_args.d, bounds_args.eps, bounds_args.delta, bounds_args.pi_min,
        bounds_args.gamma_ps, bounds_args.pi_mu);
    mcmx::kv(std::cout, "m_tv_term", ub.m_tv_term);
    mcmx::kv(std::cout, "m_mixing_term", ub.m_mixing_term);
    mcmx::kv(std::cout, "m_required", ub.m_required);
    const bool lower_ok = bounds_args.d >= 12 && bounds_args.d % 6 == 0 &&
                          bounds_args.eps > 0.0 && bounds_args.eps < 1.0 / 32.0 &&
                          bounds_args.gamma_ps > 0.0 &&
                          bounds_args.gamma_ps < 1.0 / 8.0;
    if (lower_ok) {
      const mcmx::SampleSizeLower lb = mcmx::sample_size_lower(
          bounds_args.d, bounds_args.eps, bounds_args.pi_min,
          bounds_args.gamma_ps);
      mcmx::kv(std::cout, "lower_tv_term", lb.tv_term);
      mcmx::kv(std::cout, "lower_mixing_term", lb.mixing_term);
      mcmx::kv(std::cout, "lower_mixing_note",
               std::string("order-of-magnitude reference (uses the "
                           "conservative eta = gamma_ps conversion)"));
    } else {
      mcmx::kv(std::cout, "lower_note",
               std::string("lower-bound terms need d = 6k >= 12, eps < 1/32, "
                           "gamma_ps < 1/8"));
    }
  });

  // ---- cover-time ---------------------------------------------------------
  auto* cover = app.add_subcommand(
      "cover-time", "Monte-Carlo clique cover times for the rim family");
  struct {
    int d = 0, trials = 0;
    double eta = 0.0, eps = 0.125;
    std::string tau, out;
    std::uint64_t seed = 0;
    long long m_limit = 0;
  } cover_args;
  cover->add_option("--d", cover_args.d, "state-space size (6k, k >= 2)")
      ->required();
  cover->add_option("--eta", cover_args.eta, "clique escape mass")->required();
  cover->add_option("--trials", cover_args.trials, "number of trials")
      ->required();
  cover->add_option("--seed", cover_args.seed, "RNG seed")->required();
  cover->add_option("--eps", cover_args.eps, "tether tilt (default 0.125)");
  cover->add_option("--tau", cover_args.tau,
                    "d/3 tilt bits (default: all zero)")
      ->check(CLI::Validator(bit_validator, "BITS"));
  cover->add_option("--m-limit", cover_args.m_limit,
                    "exceedance threshold (default: floor((d/(20 eta)) ln(d/3)))");
  cover->add_option("--out", cover_args.out, "CSV output file (default: stdout)");
  cover->callback([&] {
    mcmx::HEtaParams params;
    params.d = cover_args.d;
    params.eta = cover_args.eta;
    params.epsilon = cover_args.eps;
    params.tau = cover_args.tau.empty()
                     ? std::vector<int>(cover_args.d / 3, 0)
                     : parse_bits(cover_args.tau);
    const mcmx::StochasticMatrix M = mcmx::build_heta(params);
    const long long m_limit =
        cover_args.m_limit > 0
            ? cover_args.m_limit
            : mcmx::coupon_collector_bound(cover_args.d, cover_args.eta)
                  .threshold_m;
    const mcmx::CoverTimeStats stats = mcmx::cover_time_inner_clique(
        M, cover_args.d, m_limit, cover_args.trials, cover_args.seed);
    write_to(cover_args.out, [&](std::ostream& os) {
      os << "# target_m=" << stats.target_m
         << " empirical_exceed_prob=" << mcmx::format_real(stats.empirical_exceed_prob)
         << "\n";
      os << "trial,t_cliq,censored\n";
      for (std::size_t i = 0; i < stats.samples.size(); ++i)
        os << i + 1 << "," << stats.samples[i] << ","
           << (stats.censored[i] ? 1 : 0) << "\n";
    });
  });

  // ---- risk-sweep ---------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "risk-sweep", "Monte-Carlo risk curve from a key=value config file");
  struct {
    std::string config, out, gnuplot;
  } sweep_args;
  sweep->add_option("--config", sweep_args.config, "sweep config file")
      ->required();
  sweep->add_option("--out", sweep_args.out, "CSV output file (default: stdout)");
  auto* gnuplot_opt = sweep->add_option(
      "--emit-gnuplot", sweep_args.gnuplot,
      "also write a gnuplot script referencing the CSV (needs --out)");
  gnuplot_opt->needs(sweep->get_option("--out"));
  sweep->callback([&] {
    const mcmx::SweepConfig config = mcmx::load_sweep_config(sweep_args.config);
    const mcmx::RiskCurve curve = mcmx::run_sweep(config);
    write_to(sweep_args.out,
             [&](std::ostream& os) { mcmx::write_risk_csv(os, curve); });
    if (!sweep_args.gnuplot.empty())
      mcmx::with_output_file(sweep_args.gnuplot, [&](std::ostream& os) {
        mcmx::emit_gnuplot_script(os, sweep_args.out, curve.ensemble);
      });
  });

  // ---- verify-lemmas ------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify-lemmas", "Re-derive the documented closed forms numerically");
  verify->callback([&] {
    const std::vector<mcmx::LemmaCheck> checks = mcmx::verify_lemmas();
    for (const mcmx::LemmaCheck& c : checks)
      std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": "
                << c.detail << "\n";
    if (!mcmx::all_lemmas_pass(checks)) g_exit = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const mcmx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit;
}
