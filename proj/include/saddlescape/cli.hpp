#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saddlescape/experiments.hpp"
#include "saddlescape/landscape.hpp"

namespace saddlescape::cli {

enum class Subcommand { solve, certify, estimate_rsc, oracles, phase, overparam, onebit };

/// Raised on bad flags, bad values, or bad config keys; maps to exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when --help is requested; carries the help text, maps to exit 0.
struct HelpRequested {
  std::string text;
};

struct CliConfig {
  Subcommand sub = Subcommand::solve;

  std::string problem = "sensing";
  index_t n = 20;
  index_t m = 0;  // 0: square, use n
  index_t r = 2;
  index_t p = 0;  // 0: problem-dependent default
  double density = 0.0;
  double spread = 1.3;
  std::string link = "probit";
  double sigma = 0.05;
  double ridge = 8.0;
  double gamma = 1.3;
  double a = 1.0;  // counterexample parameter
  std::uint64_t seed = 1;
  double mu = 0.0;  // 0: default (alpha/16 when estimated, else 1/16)
  bool no_regularizer = false;
  double init_scale = 1.0;
  int threads = 0;
  int verbosity = 0;
  std::string out;
  std::string trial_log;
  std::string model_in;
  std::string model_out;
  std::string scale_norm = "spectral";

  // solver
  index_t max_iters = 6000;
  double grad_tol = 1e-9;
  std::string step = "backtracking";
  double eta = 1e-2;
  double shrink = 0.5;
  double armijo_c = 1e-4;
  bool perturb = false;
  double perturb_radius = 1e-2;
  double perturb_trigger = 1e-6;
  index_t perturb_interval = 25;

  // certify / estimate
  bool at_zero = false;
  index_t samples = 800;

  // oracles
  index_t cases = 200;

  // phase
  std::string preset = "desk";
  std::vector<index_t> ranks;
  std::vector<index_t> measurements;
  index_t trials = 10;
  double tol = 1e-4;

  // overparam
  index_t r_star = 2;
  index_t r_max = 4;
  index_t n_seeds = 10;

  // onebit sweep
  std::string sweep;
  std::vector<double> sweep_values;

  SolverConfig solver_config() const {
    SolverConfig cfg;
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;
    if (step == "fixed") {
      cfg.step = StepRule::fixed;
      cfg.eta = eta;
    } else if (step == "backtracking") {
      cfg.step = StepRule::backtracking;
      cfg.shrink = shrink;
      cfg.armijo_c = armijo_c;
    } else {
      throw UsageError("unknown step rule '" + step + "' (use fixed or backtracking)");
    }
    if (perturb) {
      SolverConfig::Perturb pc;
      pc.radius = perturb_radius;
      pc.trigger_grad_tol = perturb_trigger;
      pc.check_interval = perturb_interval;
      cfg.perturb = pc;
    }
    cfg.rng_seed = seed;
    cfg.validate();
    return cfg;
  }

  index_t cols() const { return m > 0 ? m : n; }

  LinkFunction link_function() const {
    if (link == "logistic") return LinkFunction::logistic();
    if (link == "probit") return LinkFunction::probit(sigma);
    throw UsageError("unknown link '" + link + "' (use logistic or probit)");
  }
};

namespace detail {

inline std::vector<index_t> parse_index_list(const std::string& text) {
  std::vector<index_t> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    out.push_back(std::stoll(field));
  }
  if (out.empty()) throw UsageError("empty integer list '" + text + "'");
  return out;
}

inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    out.push_back(std::stod(field));
  }
  if (out.empty()) throw UsageError("empty value list '" + text + "'");
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Flat key=value config text; '#' starts a comment, dotted keys express
/// nesting (solver.grad_tol). Returns insertion-ordered pairs.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(f, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

}  // namespace detail

/// Parse command-line arguments (argv[0] excluded) into a validated
/// CliConfig. A config file given via --config supplies defaults for any
/// option not set on the command line; flags always win.
inline CliConfig parse_args(const std::vector<std::string>& args) {
  CliConfig cfg;
  std::string config_path;
  std::string ranks_text, measurements_text, sweep_values_text;

  CLI::App app{"saddlescape: factored low-rank matrix optimization and landscape analysis"};
  app.require_subcommand(1);

  // registry: config-file key -> (option pointer, applier)
  std::vector<std::tuple<std::string, CLI::Option*, std::function<void(const std::string&)>>> keys;
  auto reg = [&keys](const std::string& key, CLI::Option* opt,
                     std::function<void(const std::string&)> apply) {
    keys.emplace_back(key, opt, std::move(apply));
  };

  auto add_common = [&](CLI::App* sub) {
    reg("seed", sub->add_option("--seed", cfg.seed, "RNG seed (env SADDLESCAPE_SEED as fallback)"),
        [&cfg](const std::string& v) { cfg.seed = std::stoull(v); });
    reg("threads", sub->add_option("--threads", cfg.threads, "worker thread cap (0: all cores)"),
        [&cfg](const std::string& v) { cfg.threads = std::stoi(v); });
    reg("out", sub->add_option("--out", cfg.out, "output CSV path"),
        [&cfg](const std::string& v) { cfg.out = v; });
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_flag("-v,--verbose", cfg.verbosity, "increase verbosity");
  };

  auto add_solver = [&](CLI::App* sub) {
    reg("solver.max_iters", sub->add_option("--max-iters", cfg.max_iters, "iteration cap"),
        [&cfg](const std::string& v) { cfg.max_iters = std::stoll(v); });
    reg("solver.grad_tol", sub->add_option("--grad-tol", cfg.grad_tol, "gradient norm tolerance"),
        [&cfg](const std::string& v) { cfg.grad_tol = std::stod(v); });
    reg("solver.step", sub->add_option("--step", cfg.step, "step rule: backtracking|fixed"),
        [&cfg](const std::string& v) { cfg.step = v; });
    reg("solver.step.eta", sub->add_option("--eta", cfg.eta, "fixed step size"),
        [&cfg](const std::string& v) { cfg.eta = std::stod(v); });
    reg("solver.step.shrink", sub->add_option("--shrink", cfg.shrink, "backtracking shrink factor"),
        [&cfg](const std::string& v) { cfg.shrink = std::stod(v); });
    reg("solver.step.armijo_c", sub->add_option("--armijo-c", cfg.armijo_c, "sufficient decrease constant"),
        [&cfg](const std::string& v) { cfg.armijo_c = std::stod(v); });
    reg("solver.perturb", sub->add_flag("--perturb", cfg.perturb, "enable saddle-escape perturbations"),
        [&cfg](const std::string& v) { cfg.perturb = (v == "1" || v == "true"); });
    reg("solver.perturb.radius", sub->add_option("--perturb-radius", cfg.perturb_radius, "relative perturbation radius"),
        [&cfg](const std::string& v) { cfg.perturb_radius = std::stod(v); });
    reg("solver.perturb.trigger", sub->add_option("--perturb-trigger", cfg.perturb_trigger, "probe trigger gradient norm"),
        [&cfg](const std::string& v) { cfg.perturb_trigger = std::stod(v); });
    reg("solver.perturb.interval", sub->add_option("--perturb-interval", cfg.perturb_interval, "probe cadence"),
        [&cfg](const std::string& v) { cfg.perturb_interval = std::stoll(v); });
  };

  auto add_instance = [&](CLI::App* sub) {
    reg("problem", sub->add_option("--problem", cfg.problem,
                                   "sensing|completion|weighted|onebit|counterexample"),
        [&cfg](const std::string& v) { cfg.problem = v; });
    reg("n", sub->add_option("--n", cfg.n, "row dimension"),
        [&cfg](const std::string& v) { cfg.n = std::stoll(v); });
    reg("m", sub->add_option("--m", cfg.m, "column dimension (default: n)"),
        [&cfg](const std::string& v) { cfg.m = std::stoll(v); });
    reg("r", sub->add_option("--r", cfg.r, "rank budget"),
        [&cfg](const std::string& v) { cfg.r = std::stoll(v); });
    reg("p", sub->add_option("--p", cfg.p, "measurement / observation count"),
        [&cfg](const std::string& v) { cfg.p = std::stoll(v); });
    reg("density", sub->add_option("--density", cfg.density, "per-entry observation probability"),
        [&cfg](const std::string& v) { cfg.density = std::stod(v); });
    reg("spread", sub->add_option("--spread", cfg.spread, "weighted model: weights U(1, spread)"),
        [&cfg](const std::string& v) { cfg.spread = std::stod(v); });
    reg("link", sub->add_option("--link", cfg.link, "sign link: logistic|probit"),
        [&cfg](const std::string& v) { cfg.link = v; });
    reg("sigma", sub->add_option("--sigma", cfg.sigma, "probit noise scale"),
        [&cfg](const std::string& v) { cfg.sigma = std::stod(v); });
    reg("ridge", sub->add_option("--ridge", cfg.ridge, "sign model ridge weight"),
        [&cfg](const std::string& v) { cfg.ridge = std::stod(v); });
    reg("a", sub->add_option("--a", cfg.a, "counterexample family parameter"),
        [&cfg](const std::string& v) { cfg.a = std::stod(v); });
    reg("mu", sub->add_option("--mu", cfg.mu, "balance weight (0: alpha/16 or 1/16 fallback)")
                 ->check(CLI::NonNegativeNumber),
        [&cfg](const std::string& v) { cfg.mu = std::stod(v); });
    reg("use_regularizer",
        sub->add_flag("--no-regularizer", cfg.no_regularizer, "drop the balance regularizer"),
        [&cfg](const std::string& v) { cfg.no_regularizer = (v == "0" || v == "false"); });
    reg("init_scale", sub->add_option("--init-scale", cfg.init_scale, "random init entry scale"),
        [&cfg](const std::string& v) { cfg.init_scale = std::stod(v); });
    reg("scale_norm", sub->add_option("--scale-norm", cfg.scale_norm,
                                      "target normalization: spectral|frobenius"),
        [&cfg](const std::string& v) { cfg.scale_norm = v; });
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one factored instance");
  add_common(solve);
  add_solver(solve);
  add_instance(solve);
  reg("model_in", solve->add_option("--model", cfg.model_in, "load a sensing model dump"),
      [&cfg](const std::string& v) { cfg.model_in = v; });
  reg("model_out", solve->add_option("--dump-model", cfg.model_out, "write a sensing model dump"),
      [&cfg](const std::string& v) { cfg.model_out = v; });

  CLI::App* certify = app.add_subcommand("certify", "classify a critical point");
  add_common(certify);
  add_solver(certify);
  add_instance(certify);
  reg("at_zero", certify->add_flag("--at-zero", cfg.at_zero, "certify the origin instead of a solve"),
      [&cfg](const std::string& v) { cfg.at_zero = (v == "1" || v == "true"); });
  reg("samples", certify->add_option("--samples", cfg.samples, "curvature estimation samples"),
      [&cfg](const std::string& v) { cfg.samples = std::stoll(v); });

  CLI::App* estimate = app.add_subcommand("estimate-rsc", "estimate restricted curvature bounds");
  add_common(estimate);
  add_instance(estimate);
  reg("samples", estimate->add_option("--samples", cfg.samples, "sample count"),
      [&cfg](const std::string& v) { cfg.samples = std::stoll(v); });

  CLI::App* oracles = app.add_subcommand("oracles", "run the randomized geometry oracle suites");
  add_common(oracles);
  reg("cases", oracles->add_option("--cases", cfg.cases, "randomized cases per check"),
      [&cfg](const std::string& v) { cfg.cases = std::stoll(v); });

  CLI::App* phase = app.add_subcommand("phase", "Monte Carlo phase-transition grid");
  add_common(phase);
  add_solver(phase);
  add_instance(phase);
  reg("preset", phase->add_option("--preset", cfg.preset, "grid preset: desk|paper"),
      [&cfg](const std::string& v) { cfg.preset = v; });
  reg("ranks", phase->add_option("--ranks", ranks_text, "comma list of ranks"),
      [&ranks_text](const std::string& v) { ranks_text = v; });
  reg("measurements", phase->add_option("--measurements", measurements_text, "comma list of p values"),
      [&measurements_text](const std::string& v) { measurements_text = v; });
  reg("trials", phase->add_option("--trials", cfg.trials, "trials per cell"),
      [&cfg](const std::string& v) { cfg.trials = std::stoll(v); });
  reg("tol", phase->add_option("--tol", cfg.tol, "success tolerance (relative error)"),
      [&cfg](const std::string& v) { cfg.tol = std::stod(v); });
  reg("trial_log", phase->add_option("--trial-log", cfg.trial_log,
                                     "also write the per-trial log (contains wall-clock times)"),
      [&cfg](const std::string& v) { cfg.trial_log = v; });

  CLI::App* overparam = app.add_subcommand("overparam", "rank over-parameterization sweep");
  add_common(overparam);
  add_solver(overparam);
  add_instance(overparam);
  reg("r_star", overparam->add_option("--r-star", cfg.r_star, "true rank"),
      [&cfg](const std::string& v) { cfg.r_star = std::stoll(v); });
  reg("r_max", overparam->add_option("--r-max", cfg.r_max, "largest rank budget"),
      [&cfg](const std::string& v) { cfg.r_max = std::stoll(v); });
  reg("seeds", overparam->add_option("--seeds", cfg.n_seeds, "number of Monte Carlo seeds"),
      [&cfg](const std::string& v) { cfg.n_seeds = std::stoll(v); });
  reg("tol", overparam->add_option("--tol", cfg.tol, "relative error tolerance"),
      [&cfg](const std::string& v) { cfg.tol = std::stod(v); });

  CLI::App* onebit = app.add_subcommand("onebit", "sign-observation recovery experiment");
  add_common(onebit);
  add_solver(onebit);
  add_instance(onebit);
  reg("trials", onebit->add_option("--trials", cfg.trials, "Monte Carlo trials"),
      [&cfg](const std::string& v) { cfg.trials = std::stoll(v); });
  reg("sweep", onebit->add_option("--sweep", cfg.sweep, "sweep parameter: n|density|r|sigma"),
      [&cfg](const std::string& v) { cfg.sweep = v; });
  reg("sweep_values", onebit->add_option("--values", sweep_values_text, "comma list of sweep values"),
      [&sweep_values_text](const std::string& v) { sweep_values_text = v; });

  std::vector<const char*> argv;
  argv.push_back("saddlescape");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::ostringstream help;
    help << app.help();
    for (CLI::App* sub : app.get_subcommands({})) {
      if (sub->get_help_ptr() != nullptr && sub->get_help_ptr()->count() > 0) {
        help.str(sub->help());
      }
    }
    throw HelpRequested{help.str()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\nRun with --help for usage.");
  }

  bool seed_on_cli = false;
  for (auto& [key, opt, apply] : keys) {
    if (key == "seed" && opt->count() > 0) seed_on_cli = true;
  }

  // config file fills anything the command line left untouched
  bool seed_in_config = false;
  if (!config_path.empty()) {
    auto entries = detail::read_config_file(config_path);
    for (const auto& [key, value] : entries) {
      bool known = false;
      bool given_on_cli = false;
      std::function<void(const std::string&)>* applier = nullptr;
      for (auto& [k, opt, apply] : keys) {
        if (k != key) continue;
        known = true;
        if (opt != nullptr && opt->count() > 0) given_on_cli = true;
        if (applier == nullptr) applier = &apply;
      }
      if (!known) throw UsageError("unknown config key '" + key + "'");
      if (!given_on_cli) {
        (*applier)(value);
        if (key == "seed") seed_in_config = true;
      }
    }
  }

  if (!seed_on_cli && !seed_in_config) {
    if (const char* env = std::getenv("SADDLESCAPE_SEED")) {
      cfg.seed = std::stoull(env);
    }
  }

  if (app.got_subcommand(solve)) cfg.sub = Subcommand::solve;
  else if (app.got_subcommand(certify)) cfg.sub = Subcommand::certify;
  else if (app.got_subcommand(estimate)) cfg.sub = Subcommand::estimate_rsc;
  else if (app.got_subcommand(oracles)) cfg.sub = Subcommand::oracles;
  else if (app.got_subcommand(phase)) cfg.sub = Subcommand::phase;
  else if (app.got_subcommand(overparam)) cfg.sub = Subcommand::overparam;
  else cfg.sub = Subcommand::onebit;

  if (!ranks_text.empty()) cfg.ranks = detail::parse_index_list(ranks_text);
  if (!measurements_text.empty()) cfg.measurements = detail::parse_index_list(measurements_text);
  if (!sweep_values_text.empty()) cfg.sweep_values = detail::parse_double_list(sweep_values_text);

  // value validation beyond CLI11's type checks
  if (cfg.n < 1 || cfg.cols() < 1) throw UsageError("dimensions must be positive");
  if (cfg.mu < 0.0) throw UsageError("mu must be positive (or 0 for the default)");
  if (cfg.sub != Subcommand::oracles && cfg.problem != "counterexample") {
    if (cfg.r < 1 || cfg.r > std::min(cfg.n, cfg.cols())) {
      throw UsageError("rank must lie in [1, min(n, m)]");
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

namespace detail {

struct Instance {
  std::unique_ptr<ObjectiveModel> model;
  DenseMatrix x_star;
};

inline DenseMatrix default_target(const CliConfig& cfg) {
  Rng rng(mix_seed({cfg.seed, 0x7a26u}));
  return mat_nt(DenseMatrix::gaussian(cfg.n, cfg.r, rng),
                DenseMatrix::gaussian(cfg.cols(), cfg.r, rng));
}

inline index_t default_measurements(const CliConfig& cfg) {
  if (cfg.p > 0) return cfg.p;
  return 5 * cfg.r * (cfg.n + cfg.cols() - cfg.r);
}

inline Instance make_instance(const CliConfig& cfg) {
  Instance inst;
  if (cfg.problem == "sensing") {
    if (!cfg.model_in.empty()) {
      auto model = std::make_unique<SensingModel>(load_sensing(cfg.model_in));
      inst.x_star = DenseMatrix();  // truth unknown for a blind dump
      inst.model = std::move(model);
      return inst;
    }
    inst.x_star = default_target(cfg);
    auto model = std::make_unique<SensingModel>(gaussian_sensing_operator(
        cfg.n, cfg.cols(), default_measurements(cfg), mix_seed({cfg.seed, 0xA0u})));
    model->observe(inst.x_star);
    inst.model = std::move(model);
  } else if (cfg.problem == "completion") {
    inst.x_star = default_target(cfg);
    double density = cfg.density > 0.0
                         ? cfg.density
                         : std::min(1.0, static_cast<double>(default_measurements(cfg)) /
                                             static_cast<double>(cfg.n * cfg.cols()));
    inst.model = std::make_unique<MaskedLeastSquaresModel>(
        bernoulli_mask_model(inst.x_star, density, mix_seed({cfg.seed, 0xB1u})));
  } else if (cfg.problem == "weighted") {
    inst.x_star = default_target(cfg);
    Rng rng(mix_seed({cfg.seed, 0x3e1u}));
    DenseMatrix weights(cfg.n, cfg.cols());
    for (double& v : weights.entries()) v = rng.uniform(1.0, std::max(1.0, cfg.spread));
    inst.model = std::make_unique<WeightedModel>(weights, inst.x_star);
  } else if (cfg.problem == "onebit") {
    Rng rng(mix_seed({cfg.seed, 0x0b17u}));
    DenseMatrix u0(cfg.n, cfg.r), v0(cfg.cols(), cfg.r);
    for (double& e : u0.entries()) e = rng.uniform(-0.5, 0.5);
    for (double& e : v0.entries()) e = rng.uniform(-0.5, 0.5);
    DenseMatrix x0 = mat_nt(u0, v0);
    double scale = cfg.scale_norm == "frobenius" ? frobenius_norm(x0)
                                                 : svd(x0).singular_values[0];
    if (cfg.scale_norm != "frobenius" && cfg.scale_norm != "spectral") {
      throw UsageError("scale-norm must be spectral or frobenius");
    }
    if (scale > 0.0) x0 *= 1.0 / scale;
    inst.x_star = x0;
    double density = cfg.density > 0.0 ? cfg.density : 1.0;
    inst.model = std::make_unique<OneBitModel>(
        onebit_sample(x0, cfg.link_function(), density, mix_seed({cfg.seed, 0x0b5u}), cfg.ridge));
  } else {
    throw UsageError("unknown problem '" + cfg.problem + "'");
  }
  return inst;
}

struct TraceRow {
  index_t iter;
  double objective;
  double rel_error;
};

inline void write_trace_csv(const std::string& path, index_t r, const std::vector<TraceRow>& rows) {
  CsvTable t;
  t.header = {"r", "iter", "objective", "rel_error"};
  for (const TraceRow& row : rows) {
    t.rows.push_back({std::to_string(r), std::to_string(row.iter),
                      format_double(row.objective), format_double(row.rel_error)});
  }
  write_csv(path, t);
}

inline void print_certificate(std::ostream& os, const LandscapeCertificate& cert, double alpha,
                              std::optional<double> beta) {
  os << "classification:       " << to_string(cert.classification) << "\n"
     << "saddle case:          " << to_string(cert.saddle_case) << "\n"
     << "grad norm:            " << format_double(cert.grad_norm) << "\n"
     << "balance residual:     " << format_double(cert.balance_residual) << "\n"
     << "global candidate:     " << (cert.is_global_candidate ? "yes" : "no") << "\n"
     << "lambda_min:           " << format_double(cert.lambda_min) << "\n"
     << "saddle bound:         " << format_double(cert.saddle_bound) << "\n"
     << "saddle bound (alt):   " << format_double(cert.saddle_bound_alt) << "\n"
     << "alignment curvature:  " << format_double(cert.procrustes_curvature) << "\n"
     << "rank(W) / rank(X*):   " << cert.rank_w << " / " << cert.rank_truth << "\n"
     << "alpha used:           " << format_double(alpha) << "\n";
  if (beta) os << "beta used:            " << format_double(*beta) << "\n";
  os << "hypothesis met:       " << (cert.hypothesis_met ? "yes" : "no") << "\n"
     << "spurious local min:   " << (cert.spurious_local_min ? "yes" : "no") << "\n";
}

inline void write_certificate_csv(const std::string& path, const LandscapeCertificate& cert,
                                  double alpha, std::optional<double> beta) {
  CsvTable t;
  t.header = {"classification", "saddle_case", "grad_norm", "balance_residual",
              "is_global_candidate", "lambda_min", "saddle_bound", "saddle_bound_alt",
              "procrustes_curvature", "rank_w", "rank_truth", "alpha", "beta",
              "hypothesis_met", "spurious_local_min"};
  t.rows.push_back({to_string(cert.classification), to_string(cert.saddle_case),
                    format_double(cert.grad_norm), format_double(cert.balance_residual),
                    cert.is_global_candidate ? "1" : "0", format_double(cert.lambda_min),
                    format_double(cert.saddle_bound), format_double(cert.saddle_bound_alt),
                    format_double(cert.procrustes_curvature), std::to_string(cert.rank_w),
                    std::to_string(cert.rank_truth), format_double(alpha),
                    beta ? format_double(*beta) : "", cert.hypothesis_met ? "1" : "0",
                    cert.spurious_local_min ? "1" : "0"});
  write_csv(path, t);
}

inline ExperimentGrid phase_grid(const CliConfig& cfg) {
  ExperimentGrid grid;
  grid.problem = cfg.problem == "completion" ? ProblemKind::completion : ProblemKind::sensing;
  grid.trials = cfg.trials;
  grid.success_tol = cfg.tol;
  grid.base_seed = cfg.seed;
  grid.use_regularizer = !cfg.no_regularizer;
  grid.mu = cfg.mu > 0.0 ? cfg.mu : default_mu();
  grid.init_scale = cfg.init_scale;
  grid.threads = cfg.threads;
  grid.solver = cfg.solver_config();

  if (!cfg.ranks.empty() && !cfg.measurements.empty()) {
    grid.n = cfg.n;
    grid.m = cfg.cols();
    grid.rank_values = cfg.ranks;
    grid.measurement_values = cfg.measurements;
    return grid;
  }
  if (cfg.preset == "desk") {
    if (grid.problem == ProblemKind::sensing) {
      grid.n = grid.m = 20;
      grid.rank_values = {1, 2, 3, 4, 5, 6};
      grid.measurement_values = {40, 80, 120, 160, 200, 240, 280, 320, 360, 400};
    } else {
      grid.n = grid.m = 40;
      grid.rank_values = {1, 2, 3, 4, 6, 8};
      grid.measurement_values = {160, 320, 480, 640, 800, 1120, 1440};
      grid.solver.max_iters = std::max<index_t>(grid.solver.max_iters, 8000);
    }
  } else if (cfg.preset == "paper") {
    if (grid.problem == ProblemKind::sensing) {
      grid.n = grid.m = 50;
      for (index_t r = 1; r <= 19; r += 2) grid.rank_values.push_back(r);
      for (index_t p = 250; p <= 2500; p += 250) grid.measurement_values.push_back(p);
    } else {
      grid.n = grid.m = 100;
      grid.rank_values = {1, 5, 10, 15, 20, 25, 30};
      for (index_t p = 1000; p <= 9000; p += 1000) grid.measurement_values.push_back(p);
      grid.solver.max_iters = std::max<index_t>(grid.solver.max_iters, 12000);
    }
  } else {
    throw UsageError("unknown preset '" + cfg.preset + "' (use desk or paper, or give "
                     "--ranks and --measurements)");
  }
  return grid;
}

}  // namespace detail

inline int run_solve(const CliConfig& cfg, std::ostream& os) {
  if (cfg.problem == "counterexample") {
    CounterexampleProblem problem(cfg.a);
    DenseMatrix start = problem.model.critical_point();
    Rng rng(mix_seed({cfg.seed, 0xce11u}));
    start(0, 0) += 1e-3 * rng.gaussian();
    start(1, 0) += 1e-3 * rng.gaussian();
    SolverConfig sc = cfg.solver_config();
    std::vector<detail::TraceRow> rows;
    DenseMatrix star = problem.model.global_minimizer();
    SolveObserver<CounterexampleProblem> obs = [&](index_t iter, const DenseMatrix& u,
                                                   double value, double) {
      double d = std::min(frobenius_norm(u - star), frobenius_norm(u + star)) /
                 frobenius_norm(star);
      rows.push_back({iter, value, d});
    };
    auto rep = cfg.perturb ? perturbed_descent(problem, start, sc, obs)
                           : gradient_descent(problem, start, sc, obs);
    os << "termination:      " << to_string(rep.termination) << "\n"
       << "iterations:       " << rep.iterations_used << "\n"
       << "final value:      " << format_double(rep.final_value) << "\n"
       << "final grad norm:  " << format_double(rep.final_grad_norm) << "\n"
       << "perturbations:    " << rep.perturbation_events << "\n";
    if (!cfg.out.empty()) detail::write_trace_csv(cfg.out, 1, rows);
    return 0;
  }

  detail::Instance inst = detail::make_instance(cfg);
  if (!cfg.model_out.empty()) {
    auto* sensing = dynamic_cast<const SensingModel*>(inst.model.get());
    if (sensing == nullptr) throw UsageError("--dump-model requires a sensing problem");
    save_sensing(*sensing, cfg.model_out);
  }

  const ObjectiveModel& model = *inst.model;
  FactorPair start = random_init(model.rows(), model.cols(), cfg.r, cfg.init_scale,
                                 mix_seed({cfg.seed, 0x1217u}));
  SolverConfig sc = cfg.solver_config();
  const DenseMatrix* truth = model.ground_truth();
  double truth_norm = truth ? frobenius_norm(*truth) : 0.0;
  std::vector<detail::TraceRow> rows;

  auto observe = [&](index_t iter, const FactorPair& w, double value, double) {
    double rel = truth && truth_norm > 0.0
                     ? frobenius_norm(w.product() - *truth) / truth_norm
                     : -1.0;
    rows.push_back({iter, value, rel});
  };

  SolveReport<FactorPair> rep;
  double mu = cfg.mu > 0.0 ? cfg.mu : default_mu();
  if (cfg.no_regularizer) {
    UnregularizedProblem problem(model, cfg.r);
    SolveObserver<UnregularizedProblem> obs = observe;
    rep = cfg.perturb ? perturbed_descent(problem, start, sc, obs)
                      : gradient_descent(problem, start, sc, obs);
  } else {
    FactoredProblem problem(model, cfg.r, mu);
    SolveObserver<FactoredProblem> obs = observe;
    rep = cfg.perturb ? perturbed_descent(problem, start, sc, obs)
                      : gradient_descent(problem, start, sc, obs);
  }

  os << "termination:      " << to_string(rep.termination) << "\n"
     << "iterations:       " << rep.iterations_used << "\n"
     << "final value:      " << format_double(rep.final_value) << "\n"
     << "final grad norm:  " << format_double(rep.final_grad_norm) << "\n"
     << "balance residual: " << format_double(frobenius_norm(gram_imbalance(rep.final_point)))
     << "\n";
  if (truth && truth_norm > 0.0) {
    os << "rel error:        "
       << format_double(frobenius_norm(rep.final_point.product() - *truth) / truth_norm) << "\n";
  }
  if (rep.perturbation_events > 0) os << "perturbations:    " << rep.perturbation_events << "\n";
  if (!cfg.out.empty()) detail::write_trace_csv(cfg.out, cfg.r, rows);
  return 0;
}

inline int run_certify(const CliConfig& cfg, std::ostream& os) {
  if (cfg.problem == "counterexample") {
    LandscapeCertificate cert = certify_counterexample(cfg.a);
    detail::print_certificate(os, cert, 1.0, 1.0 + cfg.a);
    if (!cfg.out.empty()) detail::write_certificate_csv(cfg.out, cert, 1.0, 1.0 + cfg.a);
    return 0;
  }
  if (cfg.problem != "sensing" && cfg.problem != "weighted") {
    throw UsageError("certify supports sensing, weighted, or counterexample problems");
  }
  detail::Instance inst = detail::make_instance(cfg);
  const ObjectiveModel& model = *inst.model;

  RscEstimate est = estimate_rsc(model, cfg.r, cfg.samples, mix_seed({cfg.seed, 0xe57u}));
  double alpha = est.alpha_hat;
  double mu = cfg.mu > 0.0 ? cfg.mu : default_mu(alpha);
  FactoredProblem problem(model, cfg.r, mu);

  FactorPair w(DenseMatrix(model.rows(), cfg.r), DenseMatrix(model.cols(), cfg.r));
  if (!cfg.at_zero) {
    SolverConfig sc = cfg.solver_config();
    sc.grad_tol = std::min(sc.grad_tol, 1e-10);
    sc.max_iters = std::max<index_t>(sc.max_iters, 30000);
    FactorPair start = random_init(model.rows(), model.cols(), cfg.r, cfg.init_scale,
                                   mix_seed({cfg.seed, 0x1217u}));
    auto rep = gradient_descent(problem, start, sc);
    if (rep.termination != Termination::converged) {
      throw std::runtime_error("certify: solver did not reach a critical point (" +
                               std::string(to_string(rep.termination)) + ")");
    }
    w = newton_polish(problem, rep.final_point, 6, 1e-12);
  }

  CertifyOptions opts;
  opts.beta = est.beta_hat;
  LandscapeCertificate cert = certify_point(problem, w, inst.x_star, alpha, opts);
  detail::print_certificate(os, cert, alpha, est.beta_hat);
  if (!cfg.out.empty()) detail::write_certificate_csv(cfg.out, cert, alpha, est.beta_hat);
  return 0;
}

inline int run_estimate(const CliConfig& cfg, std::ostream& os) {
  detail::Instance inst = detail::make_instance(cfg);
  RscEstimate est = estimate_rsc(*inst.model, cfg.r, cfg.samples, mix_seed({cfg.seed, 0xe57u}));
  os << "alpha_hat: " << format_double(est.alpha_hat) << "\n"
     << "beta_hat:  " << format_double(est.beta_hat) << "\n"
     << "ratio:     " << format_double(est.beta_hat / est.alpha_hat) << "\n"
     << "samples:   " << est.samples << " (point rank " << est.rank_point << ", direction rank "
     << est.rank_direction << ")\n";
  if (!cfg.out.empty()) emit_csv(est, cfg.out);
  return 0;
}

inline int run_oracles(const CliConfig& cfg, std::ostream& os) {
  OracleOptions opts;
  opts.cases = cfg.cases;
  OracleReport geometry = run_geometry_oracles(cfg.seed, opts);
  OracleReport split = run_curvature_split_oracle(mix_seed({cfg.seed, 0x5711u}));

  OracleReport combined;
  combined.tol = geometry.tol;
  combined.checks = geometry.checks;
  combined.checks.insert(combined.checks.end(), split.checks.begin(), split.checks.end());

  {
    SensingModel sensing = gaussian_sensing_operator(10, 8, 600, mix_seed({cfg.seed, 0x91u}));
    Rng rng(mix_seed({cfg.seed, 0x92u}));
    DenseMatrix x_star = mat_nt(DenseMatrix::gaussian(10, 2, rng), DenseMatrix::gaussian(8, 2, rng));
    sensing.observe(x_star);
    UniquenessReport rep = check_prop1_uniqueness(sensing, 2, cfg.cases, mix_seed({cfg.seed, 0x93u}));
    combined.checks.push_back({"global_gap_sensing", rep.probes, rep.violations, rep.max_violation});
  }
  {
    Rng rng(mix_seed({cfg.seed, 0x94u}));
    DenseMatrix weights(8, 8);
    for (double& v : weights.entries()) v = rng.uniform(1.0, 1.2);
    DenseMatrix x_star = mat_nt(DenseMatrix::gaussian(8, 2, rng), DenseMatrix::gaussian(8, 2, rng));
    WeightedModel weighted(weights, x_star);
    UniquenessReport rep = check_prop1_uniqueness(weighted, 2, cfg.cases, mix_seed({cfg.seed, 0x95u}));
    combined.checks.push_back({"global_gap_weighted", rep.probes, rep.violations, rep.max_violation});
  }

  index_t total_violations = 0;
  for (const auto& c : combined.checks) {
    os << c.name << ": " << c.cases << " cases, " << c.violations << " violations, max "
       << format_double(c.max_violation) << "\n";
    total_violations += c.violations;
  }
  os << (total_violations == 0 ? "all checks clear\n" : "violations found\n");
  if (!cfg.out.empty()) emit_csv(combined, cfg.out);
  return 0;
}

inline int run_phase(const CliConfig& cfg, std::ostream& os) {
  ExperimentGrid grid = detail::phase_grid(cfg);
  PhaseTable table = grid.problem == ProblemKind::sensing ? run_sensing_phase(grid)
                                                          : run_completion_phase(grid);
  for (const PhaseCell& cell : table.cells) {
    if (cfg.verbosity > 0) {
      os << "r=" << cell.r << " p=" << cell.p << " success=" << format_double(cell.success_rate)
         << " mean_rel_error=" << format_double(cell.mean_rel_error) << "\n";
    }
  }
  os << "cells: " << table.cells.size() << ", trials/cell: " << grid.trials << "\n";
  if (!cfg.out.empty()) {
    emit_csv(table, cfg.out);
    os << "phase table written to " << cfg.out << "\n";
  }
  if (!cfg.trial_log.empty()) {
    emit_trial_log(table, cfg.trial_log);
    os << "trial log written to " << cfg.trial_log << " (wall_ms is measured time)\n";
  }
  return 0;
}

inline int run_overparam(const CliConfig& cfg, std::ostream& os) {
  OverparamOptions opts;
  opts.rel_tol = cfg.tol > 0.0 ? cfg.tol : 1e-3;
  opts.mu = cfg.mu > 0.0 ? cfg.mu : default_mu();
  opts.use_regularizer = !cfg.no_regularizer;
  opts.init_scale = cfg.init_scale;
  opts.solver = cfg.solver_config();
  opts.solver.max_iters = std::max<index_t>(opts.solver.max_iters, 20000);
  opts.threads = cfg.threads;
  opts.base_seed = cfg.seed;
  index_t p = cfg.p > 0 ? cfg.p : 4 * cfg.r_max * cfg.n;

  OverparamReport report =
      run_overparam_sweep(cfg.n, cfg.cols(), cfg.r_star, cfg.r_max, p, cfg.n_seeds, opts);

  index_t monotone_seeds = 0;
  for (index_t s = 0; s < cfg.n_seeds; ++s) {
    bool monotone = true;
    index_t prev = -1;
    bool all_reached = true;
    for (const OverparamArm& arm : report.arms) {
      if (arm.seed_index != s) continue;
      if (arm.iters_to_tol < 0) all_reached = false;
      if (prev >= 0 && arm.iters_to_tol >= 0 && arm.iters_to_tol < prev) monotone = false;
      prev = arm.iters_to_tol;
    }
    if (monotone && all_reached) ++monotone_seeds;
    for (const OverparamArm& arm : report.arms) {
      if (arm.seed_index != s) continue;
      if (cfg.verbosity > 0) {
        os << "seed " << s << " r=" << arm.r << " iters_to_tol=" << arm.iters_to_tol
           << " final_rel_error=" << format_double(arm.final_rel_error) << "\n";
      }
    }
  }
  os << "seeds with nondecreasing iterations across ranks: " << monotone_seeds << "/"
     << cfg.n_seeds << "\n";
  if (!cfg.out.empty()) {
    emit_csv(report, cfg.out);
    os << "traces written to " << cfg.out << "\n";
  }
  return 0;
}

inline int run_onebit(const CliConfig& cfg, std::ostream& os) {
  OneBitConfig oc;
  oc.n = cfg.n;
  oc.r = cfg.r;
  oc.density = cfg.density > 0.0 ? cfg.density : 1.0;
  oc.link = cfg.link_function();
  oc.trials = cfg.trials;
  oc.base_seed = cfg.seed;
  oc.ridge = cfg.ridge;
  oc.scale_norm = cfg.scale_norm == "frobenius" ? ScaleNorm::frobenius : ScaleNorm::spectral;
  oc.init_scale = cfg.init_scale > 0.0 && cfg.init_scale != 1.0 ? cfg.init_scale : 0.05;
  oc.use_regularizer = !cfg.no_regularizer && cfg.mu > 0.0;
  oc.mu = cfg.mu > 0.0 ? cfg.mu : default_mu();
  oc.solver = cfg.solver_config();
  oc.threads = cfg.threads;

  if (!cfg.sweep.empty()) {
    if (cfg.sweep_values.empty()) throw UsageError("--sweep requires --values");
    OneBitSweepReport report = run_onebit_sweep(oc, cfg.sweep, cfg.sweep_values);
    for (std::size_t i = 0; i < report.values.size(); ++i) {
      os << cfg.sweep << "=" << format_double(report.values[i])
         << " mean_sq_rel_error=" << format_double(report.mean_per_value[i]) << "\n";
    }
    if (!cfg.out.empty()) emit_csv(report, cfg.out);
    return 0;
  }

  OneBitReport report = run_onebit_experiment(oc);
  os << "trials:            " << oc.trials << "\n"
     << "mean sq rel error: " << format_double(report.mean_sq_rel_error) << "\n";
  if (cfg.verbosity > 0) {
    for (const OneBitTrial& t : report.trials) {
      os << "  trial " << t.trial << ": sq_rel_error=" << format_double(t.sq_rel_error)
         << " observed=" << t.observed << "\n";
    }
  }
  if (!cfg.out.empty()) emit_csv(report, cfg.out);
  return 0;
}

/// Run the configured subcommand. Exit codes: 0 success, 1 validation
/// error, 2 runtime failure.
inline int dispatch(const CliConfig& cfg, std::ostream& os = std::cout) {
  try {
    switch (cfg.sub) {
      case Subcommand::solve: return run_solve(cfg, os);
      case Subcommand::certify: return run_certify(cfg, os);
      case Subcommand::estimate_rsc: return run_estimate(cfg, os);
      case Subcommand::oracles: return run_oracles(cfg, os);
      case Subcommand::phase: return run_phase(cfg, os);
      case Subcommand::overparam: return run_overparam(cfg, os);
      case Subcommand::onebit: return run_onebit(cfg, os);
    }
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace saddlescape::cli
