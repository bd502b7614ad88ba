#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "saddlescape/csv.hpp"
#include "saddlescape/factored.hpp"
#include "saddlescape/landscape.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/objectives.hpp"
#include "saddlescape/rng.hpp"
#include "saddlescape/solvers.hpp"

namespace saddlescape {

/// Run fn(i) for i in [0, count) across at most max_threads workers.
/// Tasks must be independent; results should be written into per-index
/// slots so the outcome does not depend on scheduling.
inline void parallel_for(index_t count, int max_threads, const std::function<void(index_t)>& fn) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int workers = max_threads > 0 ? std::min(max_threads, hw) : hw;
  workers = static_cast<int>(std::min<index_t>(workers, count));
  if (workers <= 1) {
    for (index_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<index_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        index_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Grids and results
// ---------------------------------------------------------------------------

enum class ProblemKind { sensing, completion, onebit };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::sensing: return "sensing";
    case ProblemKind::completion: return "completion";
    case ProblemKind::onebit: return "onebit";
  }
  return "unknown";
}

struct ExperimentGrid {
  ProblemKind problem = ProblemKind::sensing;
  index_t n = 20, m = 20;
  std::vector<index_t> rank_values;
  std::vector<index_t> measurement_values;  // per-cell measurement counts
  index_t trials = 10;
  double success_tol = 1e-4;  // relative reconstruction error
  std::uint64_t base_seed = 1;
  bool use_regularizer = true;
  SolverConfig solver;
  double mu = 1.0 / 16.0;
  double init_scale = 1.0;
  int threads = 0;  // 0: all available cores

  void validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("ExperimentGrid: dimensions must be positive");
    if (trials < 1) throw std::invalid_argument("ExperimentGrid: trials must be at least 1");
    if (success_tol <= 0.0) throw std::invalid_argument("ExperimentGrid: success_tol must be positive");
    if (rank_values.empty() || measurement_values.empty()) {
      throw std::invalid_argument("ExperimentGrid: empty rank or measurement list");
    }
    for (index_t r : rank_values) {
      if (r < 1 || r > std::min(n, m)) throw std::invalid_argument("ExperimentGrid: rank out of range");
    }
    for (index_t p : measurement_values) {
      if (p < 1) throw std::invalid_argument("ExperimentGrid: measurement counts must be positive");
    }
    solver.validate();
  }
};

struct TrialResult {
  index_t cell_r = 0, cell_p = 0;
  index_t trial = 0;
  std::uint64_t seed = 0;
  double rel_error = 0.0;
  bool success = false;
  index_t iters = 0;
  double wall_ms = 0.0;
  bool degenerate = false;  // information-theoretically unrecoverable draw
};

struct PhaseCell {
  index_t r = 0, p = 0;
  double success_rate = 0.0;
  double mean_rel_error = 0.0;
};

struct PhaseTable {
  ExperimentGrid grid;
  std::vector<PhaseCell> cells;        // rank-major, measurement-minor order
  std::vector<TrialResult> trial_log;  // same order, trials innermost
};

/// Per-trial stream seed; distinct across cells and trials by mixing.
inline std::uint64_t trial_seed(std::uint64_t base, index_t r, index_t p, index_t trial) {
  return mix_seed({base, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(p),
                   static_cast<std::uint64_t>(trial)});
}

// ---------------------------------------------------------------------------
// Chunked factored solve with an early stop on relative error
// ---------------------------------------------------------------------------

struct FactoredSolveOutcome {
  FactorPair point;
  double rel_error = 0.0;
  index_t iters = 0;
  index_t iters_to_tol = -1;  // first iterate meeting the tolerance; -1 if never
  Termination termination = Termination::max_iters;
  std::vector<std::pair<double, double>> trace;  // (objective, rel_error) per iterate
};

namespace detail {

template <SmoothProblem P>
FactoredSolveOutcome solve_tracking_error(const P& problem, FactorPair start,
                                          const DenseMatrix& x_star, const SolverConfig& cfg,
                                          double rel_tol, bool keep_trace,
                                          index_t chunk = 250) {
  FactoredSolveOutcome out;
  const double x_norm = std::max(frobenius_norm(x_star), 1e-300);
  double stop_at = rel_tol / 3.0;  // margin below the success threshold
  index_t done = 0;
  FactorPair w = std::move(start);

  auto record = [&](const FactorPair& point, double value, index_t iter_global) {
    double rel = frobenius_norm(point.product() - x_star) / x_norm;
    if (keep_trace) out.trace.emplace_back(value, rel);
    if (out.iters_to_tol < 0 && rel <= rel_tol) out.iters_to_tol = iter_global;
    return rel;
  };

  double rel = record(w, problem.value(w), 0);
  while (done < cfg.max_iters) {
    if (rel <= stop_at) break;
    SolverConfig sub = cfg;
    sub.max_iters = std::min(chunk, cfg.max_iters - done);
    index_t base_iter = done;
    double last_rel = rel;
    SolveObserver<P> obs = [&](index_t iter, const FactorPair& point, double value, double) {
      if (iter == 0) return;  // chunk start duplicates the previous iterate
      last_rel = record(point, value, base_iter + iter);
    };
    auto rep = gradient_descent(problem, w, sub, obs);
    done += rep.iterations_used;
    w = std::move(rep.final_point);
    rel = last_rel;
    out.termination = rep.termination;
    if (rep.termination != Termination::max_iters) break;  // converged / stalled / diverged
  }
  if (rel <= stop_at && out.termination == Termination::max_iters) {
    out.termination = Termination::converged;
  }
  out.point = std::move(w);
  out.rel_error = frobenius_norm(out.point.product() - x_star) / x_norm;
  out.iters = done;
  return out;
}

inline DenseMatrix random_rank_r_target(index_t n, index_t m, index_t r, Rng& rng) {
  return mat_nt(DenseMatrix::gaussian(n, r, rng), DenseMatrix::gaussian(m, r, rng));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Phase-transition studies
// ---------------------------------------------------------------------------

namespace detail {

template <typename ModelFactory>
PhaseTable run_phase(const ExperimentGrid& grid, const ModelFactory& make_model) {
  grid.validate();
  PhaseTable table;
  table.grid = grid;

  struct Task {
    index_t r, p, trial;
  };
  std::vector<Task> tasks;
  for (index_t r : grid.rank_values)
    for (index_t p : grid.measurement_values)
      for (index_t t = 0; t < grid.trials; ++t) tasks.push_back({r, p, t});

  std::vector<TrialResult> results(tasks.size());
  parallel_for(static_cast<index_t>(tasks.size()), grid.threads, [&](index_t k) {
    const Task& task = tasks[static_cast<std::size_t>(k)];
    std::uint64_t seed = trial_seed(grid.base_seed, task.r, task.p, task.trial);
    auto t0 = std::chrono::steady_clock::now();

    Rng rng(mix_seed({seed, 0x7a26u}));
    DenseMatrix x_star = random_rank_r_target(grid.n, grid.m, task.r, rng);
    TrialResult tr;
    tr.cell_r = task.r;
    tr.cell_p = task.p;
    tr.trial = task.trial;
    tr.seed = seed;

    auto owned = make_model(grid, task.r, task.p, x_star, seed);
    const ObjectiveModel& model = *owned.first;
    tr.degenerate = owned.second;

    FactorPair start = random_init(grid.n, grid.m, task.r, grid.init_scale,
                                   mix_seed({seed, 0x1217u}));
    FactoredSolveOutcome outcome;
    if (grid.use_regularizer) {
      FactoredProblem problem(model, task.r, grid.mu);
      outcome = solve_tracking_error(problem, std::move(start), x_star, grid.solver,
                                     grid.success_tol, false);
    } else {
      UnregularizedProblem problem(model, task.r);
      outcome = solve_tracking_error(problem, std::move(start), x_star, grid.solver,
                                     grid.success_tol, false);
    }
    tr.rel_error = outcome.rel_error;
    tr.success = outcome.rel_error <= grid.success_tol;
    tr.iters = outcome.iters;
    tr.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    results[static_cast<std::size_t>(k)] = tr;
  });

  table.trial_log = std::move(results);
  for (index_t r : grid.rank_values) {
    for (index_t p : grid.measurement_values) {
      PhaseCell cell;
      cell.r = r;
      cell.p = p;
      index_t count = 0;
      double err_sum = 0.0;
      index_t wins = 0;
      for (const TrialResult& tr : table.trial_log) {
        if (tr.cell_r == r && tr.cell_p == p) {
          ++count;
          err_sum += tr.rel_error;
          if (tr.success) ++wins;
        }
      }
      cell.success_rate = static_cast<double>(wins) / static_cast<double>(count);
      cell.mean_rel_error = err_sum / static_cast<double>(count);
      table.cells.push_back(cell);
    }
  }
  return table;
}

}  // namespace detail

/// Gaussian-measurement recovery grid: per cell, draw a rank-r target
/// from Gaussian factors, measure with a fresh 1/sqrt(p)-scaled operator,
/// and solve the factored problem from a random start.
inline PhaseTable run_sensing_phase(const ExperimentGrid& grid) {
  if (grid.problem != ProblemKind::sensing) {
    throw std::invalid_argument("run_sensing_phase: grid.problem must be sensing");
  }
  return detail::run_phase(grid, [](const ExperimentGrid& g, index_t /*r*/, index_t p,
                                    const DenseMatrix& x_star, std::uint64_t seed) {
    auto model = std::make_unique<SensingModel>(
        gaussian_sensing_operator(g.n, g.m, p, mix_seed({seed, 0xA0u})));
    model->observe(x_star);
    return std::pair<std::unique_ptr<ObjectiveModel>, bool>(std::move(model), false);
  });
}

/// Entry-sampling recovery grid: entries observed independently with
/// probability p/(n*m); the objective is masked least squares over the
/// observed entries. Draws that miss an entire row or column are flagged
/// degenerate in the trial log (no estimator could recover them).
inline PhaseTable run_completion_phase(const ExperimentGrid& grid) {
  if (grid.problem != ProblemKind::completion) {
    throw std::invalid_argument("run_completion_phase: grid.problem must be completion");
  }
  return detail::run_phase(grid, [](const ExperimentGrid& g, index_t /*r*/, index_t p,
                                    const DenseMatrix& x_star, std::uint64_t seed) {
    double density = std::min(1.0, static_cast<double>(p) / static_cast<double>(g.n * g.m));
    auto model = std::make_unique<MaskedLeastSquaresModel>(
        bernoulli_mask_model(x_star, density, mix_seed({seed, 0xB1u})));
    bool degenerate = model->has_unobserved_line();
    return std::pair<std::unique_ptr<ObjectiveModel>, bool>(std::move(model), degenerate);
  });
}

// ---------------------------------------------------------------------------
// Over-parameterization sweep
// ---------------------------------------------------------------------------

struct OverparamArm {
  index_t seed_index = 0;
  index_t r = 0;
  index_t iters_to_tol = -1;
  double final_rel_error = 0.0;
  std::vector<std::pair<double, double>> trace;  // (objective, rel_error)
};

struct OverparamReport {
  index_t n = 0, m = 0, r_star = 0, r_max = 0, p = 0;
  double rel_tol = 1e-3;
  std::vector<OverparamArm> arms;  // seed-major, rank-minor
};

struct OverparamOptions {
  double rel_tol = 1e-3;
  double mu = 1.0 / 16.0;
  bool use_regularizer = true;
  double init_scale = 1.0;
  SolverConfig solver;
  int threads = 0;
  std::uint64_t base_seed = 1;

  OverparamOptions() {
    solver.max_iters = 20000;
    solver.grad_tol = 1e-12;
  }
};

/// Fix one rank-r* target per seed, measure with p Gaussian measurements,
/// and solve at every rank budget from r* to r_max, tracing objective and
/// relative error per iteration.
inline OverparamReport run_overparam_sweep(index_t n, index_t m, index_t r_star, index_t r_max,
                                           index_t p, index_t n_seeds,
                                           const OverparamOptions& opts = {}) {
  if (r_star < 1 || r_star > r_max || r_max > std::min(n, m)) {
    throw std::invalid_argument("run_overparam_sweep: need 1 <= r_star <= r_max <= min(n, m)");
  }
  OverparamReport report;
  report.n = n;
  report.m = m;
  report.r_star = r_star;
  report.r_max = r_max;
  report.p = p;
  report.rel_tol = opts.rel_tol;

  struct Task {
    index_t seed_index, r;
  };
  std::vector<Task> tasks;
  for (index_t s = 0; s < n_seeds; ++s)
    for (index_t r = r_star; r <= r_max; ++r) tasks.push_back({s, r});
  report.arms.resize(tasks.size());

  parallel_for(static_cast<index_t>(tasks.size()), opts.threads, [&](index_t k) {
    const Task& task = tasks[static_cast<std::size_t>(k)];
    std::uint64_t seed = mix_seed({opts.base_seed, static_cast<std::uint64_t>(task.seed_index), 0x0eau});
    Rng rng(seed);
    DenseMatrix x_star = detail::random_rank_r_target(n, m, r_star, rng);
    SensingModel model = gaussian_sensing_operator(n, m, p, mix_seed({seed, 0xA0u}));
    model.observe(x_star);

    FactorPair start = random_init(n, m, task.r, opts.init_scale,
                                   mix_seed({seed, static_cast<std::uint64_t>(task.r), 0x1217u}));
    FactoredSolveOutcome outcome;
    if (opts.use_regularizer) {
      FactoredProblem problem(model, task.r, opts.mu);
      outcome = detail::solve_tracking_error(problem, std::move(start), x_star, opts.solver,
                                             opts.rel_tol, true);
    } else {
      UnregularizedProblem problem(model, task.r);
      outcome = detail::solve_tracking_error(problem, std::move(start), x_star, opts.solver,
                                             opts.rel_tol, true);
    }

    OverparamArm arm;
    arm.seed_index = task.seed_index;
    arm.r = task.r;
    arm.iters_to_tol = outcome.iters_to_tol;
    arm.final_rel_error = outcome.rel_error;
    arm.trace = std::move(outcome.trace);
    report.arms[static_cast<std::size_t>(k)] = std::move(arm);
  });
  return report;
}

// ---------------------------------------------------------------------------
// Sign-observation recovery
// ---------------------------------------------------------------------------

enum class ScaleNorm { spectral, frobenius };

inline const char* to_string(ScaleNorm s) {
  return s == ScaleNorm::spectral ? "spectral" : "frobenius";
}

struct OneBitConfig {
  index_t n = 40;
  index_t r = 2;
  double density = 1.0;
  LinkFunction link = LinkFunction::probit(0.05);
  index_t trials = 10;
  std::uint64_t base_seed = 1;
  // The ridge must carry the scale: sign data alone cannot pin the norm,
  // and a weak ridge lets the likelihood inflate the margins without
  // bound. The projection below then restores the known normalization.
  double ridge = 8.0;
  ScaleNorm scale_norm = ScaleNorm::spectral;
  double init_scale = 0.05;
  bool use_regularizer = false;  // the likelihood fit drops the balance term by default
  double mu = 1.0 / 16.0;
  // Project the estimate onto the known normalization of the target. Sign
  // observations lose the scale as the noise vanishes; the target's unit
  // norm is part of the experimental setup, so the estimator may use it
  // (the constrained formulation this replaces does the same).
  bool rescale_to_target_norm = true;
  SolverConfig solver;
  int threads = 0;

  OneBitConfig() {
    solver.max_iters = 4000;
    solver.grad_tol = 1e-8;
  }

  void validate() const {
    if (n < 1) throw std::invalid_argument("OneBitConfig: n must be positive");
    if (r < 1 || r > n) throw std::invalid_argument("OneBitConfig: r must lie in [1, n]");
    if (density <= 0.0 || density > 1.0) {
      throw std::invalid_argument("OneBitConfig: density must be in (0, 1]");
    }
    if (trials < 1) throw std::invalid_argument("OneBitConfig: trials must be at least 1");
    solver.validate();
  }
};

struct OneBitTrial {
  index_t trial = 0;
  std::uint64_t seed = 0;
  double sq_rel_error = 0.0;  // ||Xhat - X0||_F^2 / ||X0||_F^2
  index_t observed = 0;
  index_t iters = 0;
};

struct OneBitReport {
  OneBitConfig config;
  std::vector<OneBitTrial> trials;
  double mean_sq_rel_error = 0.0;
};

/// Draw a low-rank target from uniform factors on [-1/2, 1/2], normalize
/// it, sample sign observations through the link, and fit the factored
/// likelihood from a random start.
inline OneBitReport run_onebit_experiment(const OneBitConfig& cfg) {
  cfg.validate();
  OneBitReport report;
  report.config = cfg;
  report.trials.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(cfg.trials, cfg.threads, [&](index_t t) {
    std::uint64_t seed = mix_seed({cfg.base_seed, static_cast<std::uint64_t>(t), 0x0b17u});
    Rng rng(seed);
    DenseMatrix u0(cfg.n, cfg.r), v0(cfg.n, cfg.r);
    for (double& e : u0.entries()) e = rng.uniform(-0.5, 0.5);
    for (double& e : v0.entries()) e = rng.uniform(-0.5, 0.5);
    DenseMatrix x0 = mat_nt(u0, v0);
    double scale = cfg.scale_norm == ScaleNorm::spectral
                       ? svd(x0).singular_values[0]
                       : frobenius_norm(x0);
    if (scale > 0.0) x0 *= 1.0 / scale;

    OneBitModel model = onebit_sample(x0, cfg.link, cfg.density, mix_seed({seed, 0x0b5u}), cfg.ridge);
    FactorPair start = random_init(cfg.n, cfg.n, cfg.r, cfg.init_scale, mix_seed({seed, 0x1217u}));

    SolveReport<FactorPair> solved;
    if (cfg.use_regularizer) {
      FactoredProblem problem(model, cfg.r, cfg.mu);
      solved = gradient_descent(problem, start, cfg.solver);
    } else {
      UnregularizedProblem problem(model, cfg.r);
      solved = gradient_descent(problem, start, cfg.solver);
    }

    OneBitTrial trial;
    trial.trial = t;
    trial.seed = seed;
    DenseMatrix estimate = solved.final_point.product();
    if (cfg.rescale_to_target_norm) {
      double fit_norm = cfg.scale_norm == ScaleNorm::spectral
                            ? svd(estimate).singular_values[0]
                            : frobenius_norm(estimate);
      if (fit_norm > 0.0) estimate *= 1.0 / fit_norm;  // target norm is 1 by construction
    }
    double err = frobenius_norm(estimate - x0);
    double ref = frobenius_norm(x0);
    trial.sq_rel_error = (err * err) / (ref * ref);
    trial.observed = model.observed_count();
    trial.iters = solved.iterations_used;
    report.trials[static_cast<std::size_t>(t)] = trial;
  });

  double sum = 0.0;
  for (const auto& t : report.trials) sum += t.sq_rel_error;
  report.mean_sq_rel_error = sum / static_cast<double>(cfg.trials);
  return report;
}

/// One-parameter sweep (n, density, r, or sigma), one row per (value, trial).
struct OneBitSweepRow {
  std::string param;
  double value = 0.0;
  index_t trial = 0;
  std::uint64_t seed = 0;
  double sq_rel_error = 0.0;
};

struct OneBitSweepReport {
  std::string param;
  std::vector<double> values;
  std::vector<OneBitSweepRow> rows;
  std::vector<double> mean_per_value;
};

inline OneBitSweepReport run_onebit_sweep(const OneBitConfig& base, const std::string& param,
                                          const std::vector<double>& values) {
  OneBitSweepReport report;
  report.param = param;
  report.values = values;
  for (double v : values) {
    OneBitConfig cfg = base;
    if (param == "n") {
      cfg.n = static_cast<index_t>(v);
    } else if (param == "density") {
      cfg.density = v;
    } else if (param == "r") {
      cfg.r = static_cast<index_t>(v);
    } else if (param == "sigma") {
      if (cfg.link.kind() != LinkFunction::Kind::probit) {
        throw std::invalid_argument("run_onebit_sweep: sigma sweep requires the probit link");
      }
      cfg.link = LinkFunction::probit(v);
    } else {
      throw std::invalid_argument("run_onebit_sweep: unknown parameter '" + param + "'");
    }
    OneBitReport rep = run_onebit_experiment(cfg);
    for (const auto& t : rep.trials) {
      report.rows.push_back({param, v, t.trial, t.seed, t.sq_rel_error});
    }
    report.mean_per_value.push_back(rep.mean_sq_rel_error);
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline void emit_csv(const PhaseTable& table, const std::string& path) {
  CsvTable t;
  t.header = {"problem", "n", "m", "r", "p", "trials", "success_rate", "mean_rel_error"};
  for (const PhaseCell& cell : table.cells) {
    t.rows.push_back({to_string(table.grid.problem), std::to_string(table.grid.n),
                      std::to_string(table.grid.m), std::to_string(cell.r),
                      std::to_string(cell.p), std::to_string(table.grid.trials),
                      format_double(cell.success_rate), format_double(cell.mean_rel_error)});
  }
  write_csv(path, t);
}

inline PhaseTable parse_phase_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  PhaseTable table;
  for (const auto& row : t.rows) {
    if (row.size() != 8) throw std::runtime_error("parse_phase_csv: bad row in '" + path + "'");
    PhaseCell cell;
    cell.r = std::stoll(row[3]);
    cell.p = std::stoll(row[4]);
    cell.success_rate = parse_double(row[6]);
    cell.mean_rel_error = parse_double(row[7]);
    table.cells.push_back(cell);
  }
  return table;
}

/// Wall-clock column is measured time: the one emitted quantity that is
/// not reproducible run to run.
inline void emit_trial_log(const PhaseTable& table, const std::string& path) {
  CsvTable t;
  t.header = {"cell_r", "cell_p", "trial", "seed", "rel_error", "success", "iters", "wall_ms"};
  for (const TrialResult& tr : table.trial_log) {
    t.rows.push_back({std::to_string(tr.cell_r), std::to_string(tr.cell_p),
                      std::to_string(tr.trial), std::to_string(tr.seed),
                      format_double(tr.rel_error), tr.success ? "1" : "0",
                      std::to_string(tr.iters), format_double(tr.wall_ms)});
  }
  write_csv(path, t);
}

inline void emit_csv(const OverparamReport& report, const std::string& path) {
  CsvTable t;
  t.header = {"r", "iter", "objective", "rel_error"};
  for (const OverparamArm& arm : report.arms) {
    for (std::size_t k = 0; k < arm.trace.size(); ++k) {
      t.rows.push_back({std::to_string(arm.r), std::to_string(k),
                        format_double(arm.trace[k].first), format_double(arm.trace[k].second)});
    }
  }
  write_csv(path, t);
}

inline void emit_csv(const OneBitReport& report, const std::string& path) {
  CsvTable t;
  t.header = {"n", "r", "density", "link", "sigma", "trial", "seed", "sq_rel_error", "observed"};
  const OneBitConfig& c = report.config;
  for (const OneBitTrial& tr : report.trials) {
    t.rows.push_back({std::to_string(c.n), std::to_string(c.r), format_double(c.density),
                      c.link.name(),
                      format_double(c.link.kind() == LinkFunction::Kind::probit ? c.link.sigma() : 0.0),
                      std::to_string(tr.trial), std::to_string(tr.seed),
                      format_double(tr.sq_rel_error), std::to_string(tr.observed)});
  }
  write_csv(path, t);
}

inline void emit_csv(const OneBitSweepReport& report, const std::string& path) {
  CsvTable t;
  t.header = {"param", "value", "trial", "seed", "sq_rel_error"};
  for (const OneBitSweepRow& row : report.rows) {
    t.rows.push_back({row.param, format_double(row.value), std::to_string(row.trial),
                      std::to_string(row.seed), format_double(row.sq_rel_error)});
  }
  write_csv(path, t);
}

inline void emit_csv(const OracleReport& report, const std::string& path) {
  CsvTable t;
  t.header = {"check", "cases", "violations", "max_violation"};
  for (const OracleCheck& c : report.checks) {
    t.rows.push_back({c.name, std::to_string(c.cases), std::to_string(c.violations),
                      format_double(c.max_violation)});
  }
  write_csv(path, t);
}

inline void emit_csv(const RscEstimate& est, const std::string& path) {
  CsvTable t;
  t.header = {"alpha_hat", "beta_hat", "samples", "rank_point", "rank_direction"};
  t.rows.push_back({format_double(est.alpha_hat), format_double(est.beta_hat),
                    std::to_string(est.samples), std::to_string(est.rank_point),
                    std::to_string(est.rank_direction)});
  write_csv(path, t);
}

}  // namespace saddlescape
