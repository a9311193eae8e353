#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcmx/chain.hpp"
#include "mcmx/errors.hpp"
#include "mcmx/families.hpp"
#include "mcmx/io.hpp"
#include "mcmx/learner.hpp"
#include "mcmx/rng.hpp"
#include "mcmx/sampler.hpp"
#include "mcmx/threads.hpp"

namespace mcmx {

// ---------------------------------------------------------------------------
// Monte-Carlo risk sweeps: estimate P(|||M - M_hat||| > epsilon) as a
// function of the trajectory length m, against a fixed chain or against one
// of the two adversarial ensembles. The sup over an ensemble is approximated
// two ways — worst member and uniform mixture — and both are reported; no
// claim is made of computing a true minimax value.
// ---------------------------------------------------------------------------

enum class SweepSource { kMatrix, kGpEnsemble, kHetaEnsemble };

struct SweepConfig {
  SweepSource source = SweepSource::kMatrix;
  double epsilon = 0.0;          // error threshold defining "failure"
  std::vector<int> m_grid;       // strictly increasing trajectory lengths
  long long trials_per_m = 0;
  std::uint64_t master_seed = 0;
  ErrorNorm norm = ErrorNorm::tv;
  double norm_p = 2.0;

  // Initial law: stationary by default; otherwise an explicit distribution
  // (set directly, or named by file and resolved at run time).
  std::optional<ProbDist> initial_law;
  std::string initial_law_file;

  // source = matrix
  std::optional<StochasticMatrix> matrix;
  std::string matrix_file;

  // ensembles
  int d = 0;
  double p_star = 0.0;       // star family hub mass
  double eta = 0.0;          // rim family clique exit mass
  double perturb = 0.0;      // perturbation scale epsilon of the family
  int min_dist = 0;          // star codebook Hamming separation; 0 = d/8
  std::size_t max_members = 64;

  void validate() const {
    if (!(epsilon > 0.0)) throw InvalidParams("epsilon must be > 0");
    if (m_grid.empty()) throw InvalidParams("m_grid must be nonempty");
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
      if (m_grid[i] < 1) throw InvalidParams("m_grid entries must be >= 1");
      if (i > 0 && m_grid[i] <= m_grid[i - 1])
        throw InvalidParams("m_grid must be strictly increasing");
    }
    if (trials_per_m < 1) throw InvalidParams("trials_per_m must be >= 1");
    if (max_members < 1) throw InvalidParams("max_members must be >= 1");
    switch (source) {
      case SweepSource::kMatrix:
        if (!matrix && matrix_file.empty())
          throw InvalidParams("matrix source needs matrix_file");
        break;
      case SweepSource::kGpEnsemble:
        if (d < 2 || d % 2 != 0)
          throw InvalidParams("star ensemble needs even d >= 2");
        if (!(p_star > 0.0 && p_star < 1.0 / (d + 2)))
          throw InvalidParams("p_star must lie in (0, 1/(d+2))");
        if (!(perturb > 0.0 && perturb < 1.0 / 32.0))
          throw InvalidParams("perturb must lie in (0, 1/32)");
        break;
      case SweepSource::kHetaEnsemble:
        if (d < 12 || d % 6 != 0)
          throw InvalidParams("rim ensemble needs d = 6k >= 12");
        if (!(eta > 0.0 && eta < 1.0 / 48.0))
          throw InvalidParams("eta must lie in (0, 1/48)");
        if (!(perturb > 0.0 && perturb <= 1.0 / 8.0))
          throw InvalidParams("perturb must lie in (0, 1/8]");
        break;
    }
  }
};

struct RiskPoint {
  long long m = 0;
  double empirical_risk = 0.0;
  long long trials = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double median_error = 0.0;
};

struct RiskCurve {
  std::vector<RiskPoint> rows;        // single chain, or the uniform mixture
  std::vector<RiskPoint> worst_rows;  // ensembles only: per-member max
  bool ensemble = false;
  std::size_t members = 1;
  SweepSource source = SweepSource::kMatrix;
  double epsilon = 0.0;
  std::uint64_t master_seed = 0;
};

// Wilson score interval for a binomial proportion, z = 1.96 by default.
inline std::pair<double, double> wilson_interval(long long successes,
                                                 long long trials,
                                                 double z = 1.96) {
  if (trials < 1) throw OutOfRange("trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw OutOfRange("successes must lie in [0, trials]");
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half =
      (z / denom) * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline RiskPoint make_point(long long m, const std::vector<double>& errors,
                            double epsilon) {
  RiskPoint pt;
  pt.m = m;
  pt.trials = static_cast<long long>(errors.size());
  long long exceed = 0;
  for (double e : errors) exceed += e > epsilon ? 1 : 0;
  pt.empirical_risk = static_cast<double>(exceed) / pt.trials;
  auto [lo, hi] = wilson_interval(exceed, pt.trials);
  pt.ci_low = lo;
  pt.ci_high = hi;
  pt.median_error = median_of(errors);
  return pt;
}

}  // namespace detail

// One chain of an ensemble, paired with the trajectory starting law.
struct SweepMember {
  std::string label;
  StochasticMatrix chain;
  ProbDist start;
};

inline std::vector<SweepMember> sweep_members(const SweepConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, StochasticMatrix>> chains;
  switch (config.source) {
    case SweepSource::kMatrix: {
      StochasticMatrix chain =
          config.matrix ? *config.matrix
                        : with_input_file(config.matrix_file, [](std::istream& is) {
                            return read_stochastic(is);
                          });
      chains.emplace_back("chain", std::move(chain));
      break;
    }
    case SweepSource::kGpEnsemble: {
      const int dist = config.min_dist > 0 ? config.min_dist
                                           : std::max(1, config.d / 8);
      const Codebook cb =
          varshamov_gilbert(config.d / 2, dist, config.max_members);
      for (std::size_t w = 0; w < cb.words.size(); ++w)
        chains.emplace_back("sigma=" + std::to_string(cb.words[w]),
                            gp_perturbed(config.d, config.p_star,
                                         config.perturb, cb.bits(w)));
      break;
    }
    case SweepSource::kHetaEnsemble: {
      const int n = config.d / 3;
      const std::uint64_t total = 1ull << n;
      for (std::uint64_t pat = 0;
           pat < total && pat < config.max_members; ++pat) {
        HEtaParams params;
        params.d = config.d;
        params.eta = config.eta;
        params.epsilon = config.perturb;
        params.tau.resize(n);
        for (int j = 0; j < n; ++j) params.tau[j] = (pat >> j) & 1u;
        chains.emplace_back("tau=" + std::to_string(pat), build_heta(params));
      }
      break;
    }
  }

  std::optional<ProbDist> explicit_law = config.initial_law;
  if (!explicit_law && !config.initial_law_file.empty())
    explicit_law = with_input_file(config.initial_law_file,
                                   [](std::istream& is) { return read_dist(is); });

  std::vector<SweepMember> members;
  members.reserve(chains.size());
  for (auto& [label, chain] : chains) {
    const ProbDist pi = stationary_distribution(chain);  // also checks ergodicity
    ProbDist start = explicit_law ? *explicit_law : pi;
    if (start.dim() != chain.dim())
      throw InvalidParams("initial law dimension does not match the chain");
    members.push_back(SweepMember{label, std::move(chain), std::move(start)});
  }
  return members;
}

// Runs the full (m x member x trial) grid. Each trial owns a seed derived
// from (master_seed, m, trial, member), so the result is independent of the
// execution schedule: identical configs give bit-identical curves at any
// thread count.
inline RiskCurve run_sweep(const SweepConfig& config) {
  const std::vector<SweepMember> members = sweep_members(config);
  const std::size_t n_m = config.m_grid.size();
  const std::size_t n_k = members.size();
  const std::size_t n_t = static_cast<std::size_t>(config.trials_per_m);
  const std::size_t total = n_m * n_k * n_t;

  std::vector<double> errors(total, 0.0);
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min<unsigned>(worker_count(),
                                      static_cast<unsigned>(total)));
  std::vector<std::exception_ptr> failures(workers);

  auto body = [&](unsigned wi) {
    try {
      for (;;) {
        const std::size_t task = next.fetch_add(1);
        if (task >= total) return;
        const std::size_t mi = task / (n_k * n_t);
        const std::size_t k = (task / n_t) % n_k;
        const std::size_t t = task % n_t;
        const int m = config.m_grid[mi];
        const SweepMember& member = members[k];
        const std::uint64_t seed = derive_seed(
            config.master_seed,
            {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t),
             static_cast<std::uint64_t>(k)});
        const Trajectory x =
            sample_trajectory(member.chain, member.start, m, seed);
        const LearnedChain fit = learn(x, member.chain.dim());
        errors[task] =
            learn_error(member.chain, fit, config.norm, config.norm_p);
      }
    } catch (...) {
      failures[wi] = std::current_exception();
      next.store(total);  // drain remaining work
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned wi = 0; wi < workers; ++wi) pool.emplace_back(body, wi);
    for (auto& th : pool) th.join();
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  RiskCurve curve;
  curve.ensemble = n_k > 1;
  curve.members = n_k;
  curve.source = config.source;
  curve.epsilon = config.epsilon;
  curve.master_seed = config.master_seed;
  for (std::size_t mi = 0; mi < n_m; ++mi) {
    const long long m = config.m_grid[mi];
    std::vector<double> pooled;
    pooled.reserve(n_k * n_t);
    std::size_t worst_k = 0;
    double worst_risk = -1.0;
    std::vector<double> worst_errors;
    for (std::size_t k = 0; k < n_k; ++k) {
      std::vector<double> member_errors(
          errors.begin() + static_cast<std::ptrdiff_t>((mi * n_k + k) * n_t),
          errors.begin() + static_cast<std::ptrdiff_t>((mi * n_k + k + 1) * n_t));
      long long exceed = 0;
      for (double e : member_errors) exceed += e > config.epsilon ? 1 : 0;
      const double risk = static_cast<double>(exceed) / n_t;
      if (risk > worst_risk) {
        worst_risk = risk;
        worst_k = k;
        worst_errors = member_errors;
      }
      pooled.insert(pooled.end(), member_errors.begin(), member_errors.end());
    }
    curve.rows.push_back(detail::make_point(m, pooled, config.epsilon));
    if (curve.ensemble)
      curve.worst_rows.push_back(
          detail::make_point(m, worst_errors, config.epsilon));
    (void)worst_k;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// CSV emission. Column order is fixed and carried in a versioned header
// comment; ensembles produce two sections (uniform mixture, then worst
// member) separated by a double blank line so plotting tools can address
// them as separate blocks.
// ---------------------------------------------------------------------------

inline constexpr const char* kRiskCsvVersion =
    "# mcmx-risk-curve v1 columns=m,empirical_risk,trials,ci_low,ci_high,median_error";

namespace detail {

inline void write_rows(std::ostream& os, const std::vector<RiskPoint>& rows) {
  os << "m,empirical_risk,trials,ci_low,ci_high,median_error\n";
  for (const RiskPoint& r : rows)
    os << r.m << "," << format_real(r.empirical_risk) << "," << r.trials << ","
       << format_real(r.ci_low) << "," << format_real(r.ci_high) << ","
       << format_real(r.median_error) << "\n";
}

}  // namespace detail

inline void write_risk_csv(std::ostream& os, const RiskCurve& curve) {
  os << kRiskCsvVersion << "\n";
  os << "# members=" << curve.members
     << " epsilon=" << format_real(curve.epsilon)
     << " master_seed=" << curve.master_seed << "\n";
  if (!curve.ensemble) {
    detail::write_rows(os, curve.rows);
    return;
  }
  os << "# section=uniform_mixture\n";
  detail::write_rows(os, curve.rows);
  os << "\n\n# section=worst_member\n";
  detail::write_rows(os, curve.worst_rows);
}

inline std::string risk_csv_string(const RiskCurve& curve) {
  std::ostringstream os;
  write_risk_csv(os, curve);
  return os.str();
}

// Companion gnuplot script: references the CSV, plots risk and median error
// against m on log axes.
inline void emit_gnuplot_script(std::ostream& os, const std::string& csv_path,
                                bool ensemble) {
  os << "set datafile separator ','\n"
     << "set datafile commentschars '#m'\n"
     << "set logscale x\n"
     << "set xlabel 'trajectory length m'\n"
     << "set ylabel 'empirical risk'\n"
     << "set y2label 'median error'\n"
     << "set y2tics\n"
     << "set key left bottom\n";
  if (ensemble)
    os << "plot '" << csv_path
       << "' index 0 using 1:2:4:5 with yerrorlines title 'mixture risk', \\\n"
       << "     '" << csv_path
       << "' index 1 using 1:2:4:5 with yerrorlines title 'worst-member risk', \\\n"
       << "     '" << csv_path
       << "' index 0 using 1:6 axes x1y2 with linespoints title 'median error'\n";
  else
    os << "plot '" << csv_path
       << "' using 1:2:4:5 with yerrorlines title 'risk', \\\n"
       << "     '" << csv_path
       << "' using 1:6 axes x1y2 with linespoints title 'median error'\n";
}

// ---------------------------------------------------------------------------
// Scaling read-outs
// ---------------------------------------------------------------------------

struct ScalingFit {
  long long m_star = 0;        // smallest grid m with risk <= target
  double fit_exponent = 0.0;   // slope of log(median_error) against log(m)
};

inline ScalingFit scaling_fit(const RiskCurve& curve, double target_risk) {
  const std::vector<RiskPoint>& rows = curve.rows;
  ScalingFit fit;
  bool crossed = false;
  for (const RiskPoint& r : rows)
    if (r.empirical_risk <= target_risk) {
      fit.m_star = r.m;
      crossed = true;
      break;
    }
  if (!crossed)
    throw NoCrossing("curve never reaches target risk " +
                     std::to_string(target_risk));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const RiskPoint& r : rows) {
    if (!(r.median_error > 0.0)) continue;
    const double x = std::log(static_cast<double>(r.m));
    const double y = std::log(r.median_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2)
    throw OutOfRange("need at least two positive median errors to fit a slope");
  fit.fit_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

// ---------------------------------------------------------------------------
// Flat key=value config files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("bad numeric value for " + key + ": '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("bad integer value for " + key + ": '" + v + "'");
  }
}

}  // namespace detail

// Accepted keys:
//   source = matrix | gp | heta        (required)
//   epsilon, m_grid (comma list), trials_per_m, master_seed   (required)
//   initial_law = stationary | file:<path>     (default stationary)
//   norm = tv | max | p:<value>                (default tv)
//   matrix_file = <path>                       (source = matrix)
//   d, p_star, perturb, min_dist, max_members  (source = gp)
//   d, eta, perturb, max_members               (source = heta)
inline SweepConfig parse_sweep_config(std::istream& is) {
  SweepConfig config;
  bool saw_source = false, saw_eps = false, saw_grid = false, saw_trials = false,
       saw_seed = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty key or value");

    if (key == "source") {
      if (value == "matrix") config.source = SweepSource::kMatrix;
      else if (value == "gp") config.source = SweepSource::kGpEnsemble;
      else if (value == "heta") config.source = SweepSource::kHetaEnsemble;
      else throw ParseError("unknown source '" + value + "'");
      saw_source = true;
    } else if (key == "epsilon") {
      config.epsilon = detail::parse_double(key, value);
      saw_eps = true;
    } else if (key == "m_grid") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ','))
        config.m_grid.push_back(
            static_cast<int>(detail::parse_int(key, detail::trim(item))));
      saw_grid = true;
    } else if (key == "trials_per_m") {
      config.trials_per_m = detail::parse_int(key, value);
      saw_trials = true;
    } else if (key == "master_seed") {
      config.master_seed =
          static_cast<std::uint64_t>(detail::parse_int(key, value));
      saw_seed = true;
    } else if (key == "initial_law") {
      if (value == "stationary") {
        config.initial_law_file.clear();
      } else if (value.rfind("file:", 0) == 0) {
        config.initial_law_file = value.substr(5);
        if (config.initial_law_file.empty())
          throw ParseError("initial_law file path is empty");
      } else {
        throw ParseError("initial_law must be 'stationary' or 'file:<path>'");
      }
    } else if (key == "norm") {
      if (value == "tv") config.norm = ErrorNorm::tv;
      else if (value == "max") config.norm = ErrorNorm::max;
      else if (value.rfind("p:", 0) == 0) {
        config.norm = ErrorNorm::p;
        config.norm_p = detail::parse_double(key, value.substr(2));
      } else throw ParseError("norm must be tv, max, or p:<value>");
    } else if (key == "matrix_file") {
      config.matrix_file = value;
    } else if (key == "d") {
      config.d = static_cast<int>(detail::parse_int(key, value));
    } else if (key == "p_star") {
      config.p_star = detail::parse_double(key, value);
    } else if (key == "eta") {
      config.eta = detail::parse_double(key, value);
    } else if (key == "perturb") {
      config.perturb = detail::parse_double(key, value);
    } else if (key == "min_dist") {
      config.min_dist = static_cast<int>(detail::parse_int(key, value));
    } else if (key == "max_members") {
      config.max_members =
          static_cast<std::size_t>(detail::parse_int(key, value));
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  }
  if (!saw_source) throw ParseError("missing required key 'source'");
  if (!saw_eps) throw ParseError("missing required key 'epsilon'");
  if (!saw_grid) throw ParseError("missing required key 'm_grid'");
  if (!saw_trials) throw ParseError("missing required key 'trials_per_m'");
  if (!saw_seed) throw ParseError("missing required key 'master_seed'");
  config.validate();
  return config;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  return with_input_file(path,
                         [](std::istream& is) { return parse_sweep_config(is); });
}

}  // namespace mcmx
