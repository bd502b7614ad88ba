#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saddlescape/factored.hpp"
#include "saddlescape/linalg.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/objectives.hpp"
#include "saddlescape/rng.hpp"

namespace saddlescape {

enum class StepRule { fixed, backtracking };

struct SolverConfig {
  index_t max_iters = 5000;
  StepRule step = StepRule::backtracking;
  double eta = 1e-2;        // fixed-step size
  double shrink = 0.5;      // backtracking shrink factor
  double armijo_c = 1e-4;   // sufficient-decrease constant
  double grad_tol = 1e-9;

  struct Perturb {
    double radius = 1e-2;             // relative to max(1, ||W||_F)
    double trigger_grad_tol = 1e-6;   // probe curvature below this gradient norm
    index_t check_interval = 25;      // probe cadence while triggered
    index_t max_events = 30;
  };
  std::optional<Perturb> perturb;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (grad_tol <= 0.0) throw std::invalid_argument("SolverConfig: grad_tol must be positive");
    if (step == StepRule::fixed && eta <= 0.0) {
      throw std::invalid_argument("SolverConfig: fixed step requires eta > 0");
    }
    if (step == StepRule::backtracking &&
        (shrink <= 0.0 || shrink >= 1.0 || armijo_c <= 0.0 || armijo_c >= 1.0)) {
      throw std::invalid_argument("SolverConfig: backtracking parameters must lie in (0,1)");
    }
    if (perturb && (perturb->radius <= 0.0 || perturb->trigger_grad_tol <= 0.0 ||
                    perturb->check_interval < 1)) {
      throw std::invalid_argument("SolverConfig: bad perturbation parameters");
    }
  }
};

enum class Termination {
  converged,      // gradient norm reached grad_tol (and, with escapes on, the probe was clean)
  max_iters,      // iteration cap
  escape_failed,  // perturbation budget exhausted without escaping
  diverged,       // non-finite value or gradient encountered
  stalled,        // line search could not decrease the objective
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::escape_failed: return "escape_failed";
    case Termination::diverged: return "diverged";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

template <typename Point>
struct SolveReport {
  Point final_point;
  double final_value = 0.0;
  double final_grad_norm = 0.0;
  index_t iterations_used = 0;
  Termination termination = Termination::max_iters;

  struct TraceEntry {
    double value;
    double grad_norm;
  };
  std::vector<TraceEntry> trace;  // one entry per visited iterate, including the start

  index_t perturbation_events = 0;
  std::string diagnostic;
};

template <typename P>
concept SmoothProblem = requires(const P& p, const typename P::Point& w) {
  { p.value(w) } -> std::convertible_to<double>;
  { p.gradient(w) } -> std::convertible_to<typename P::Point>;
};

template <typename P>
using SolveObserver =
    std::function<void(index_t iter, const typename P::Point& w, double value, double grad_norm)>;

namespace detail {

inline DenseMatrix gaussian_like(const DenseMatrix& a, Rng& rng) {
  return DenseMatrix::gaussian(a.rows(), a.cols(), rng);
}
inline FactorPair gaussian_like(const FactorPair& w, Rng& rng) {
  return {DenseMatrix::gaussian(w.U.rows(), w.U.cols(), rng),
          DenseMatrix::gaussian(w.V.rows(), w.V.cols(), rng)};
}
inline index_t point_dimension(const DenseMatrix& a) { return a.size(); }
inline index_t point_dimension(const FactorPair& w) { return w.dimension(); }

/// Uniform draw from the Frobenius ball of the given radius.
template <typename Point>
Point uniform_ball(const Point& shape, double radius, Rng& rng) {
  Point dir = gaussian_like(shape, rng);
  double norm = frobenius_norm(dir);
  if (norm == 0.0) return dir;
  double d = static_cast<double>(point_dimension(shape));
  double scale = radius * std::pow(rng.uniform01(), 1.0 / d) / norm;
  return scale * dir;
}

template <SmoothProblem P>
struct DescentState {
  typename P::Point w;
  double value;
  typename P::Point grad;
  double grad_norm;
};

template <SmoothProblem P>
DescentState<P> evaluate(const P& problem, typename P::Point w) {
  double v = problem.value(w);
  typename P::Point g = problem.gradient(w);
  double gn = frobenius_norm(g);
  return {std::move(w), v, std::move(g), gn};
}

}  // namespace detail

/// Plain descent on a smooth problem with either a fixed step or Armijo
/// backtracking. Stops at the gradient tolerance, the iteration cap, a
/// failed line search, or a non-finite evaluation (reported, not thrown).
template <SmoothProblem P>
SolveReport<typename P::Point> gradient_descent(const P& problem, const typename P::Point& start,
                                                const SolverConfig& cfg,
                                                const SolveObserver<P>& observer = {}) {
  cfg.validate();
  using Point = typename P::Point;
  SolveReport<Point> report;

  auto state = detail::evaluate(problem, start);
  report.trace.push_back({state.value, state.grad_norm});
  if (observer) observer(0, state.w, state.value, state.grad_norm);
  if (std::isfinite(state.value) && state.grad_norm <= cfg.grad_tol) {
    report.termination = Termination::converged;
    report.final_point = std::move(state.w);
    report.final_value = state.value;
    report.final_grad_norm = state.grad_norm;
    return report;
  }

  double eta = cfg.step == StepRule::fixed ? cfg.eta : 1.0;

  for (index_t iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!std::isfinite(state.value) || !std::isfinite(state.grad_norm)) {
      report.termination = Termination::diverged;
      report.diagnostic = "non-finite value or gradient at iteration " + std::to_string(iter - 1);
      break;
    }

    Point candidate = state.w;
    double cand_value = 0.0;
    if (cfg.step == StepRule::fixed) {
      candidate = state.w - eta * state.grad;
      cand_value = problem.value(candidate);
    } else {
      eta = std::min(eta * 2.0, 1e8);  // try growing before shrinking
      bool accepted = false;
      double g2 = state.grad_norm * state.grad_norm;
      for (int bt = 0; bt < 80; ++bt) {
        candidate = state.w - eta * state.grad;
        cand_value = problem.value(candidate);
        if (std::isfinite(cand_value) && cand_value <= state.value - cfg.armijo_c * eta * g2) {
          accepted = true;
          break;
        }
        eta *= cfg.shrink;
      }
      if (!accepted) {
        report.termination = Termination::stalled;
        report.diagnostic = "line search exhausted at iteration " + std::to_string(iter);
        break;
      }
    }

    state.w = std::move(candidate);
    state.value = cand_value;
    state.grad = problem.gradient(state.w);
    state.grad_norm = frobenius_norm(state.grad);
    report.iterations_used = iter;
    report.trace.push_back({state.value, state.grad_norm});
    if (observer) observer(iter, state.w, state.value, state.grad_norm);

    if (!std::isfinite(state.value) || !std::isfinite(state.grad_norm)) {
      report.termination = Termination::diverged;
      report.diagnostic = "non-finite value or gradient at iteration " + std::to_string(iter);
      break;
    }
    if (state.grad_norm <= cfg.grad_tol) {
      report.termination = Termination::converged;
      break;
    }
    if (iter == cfg.max_iters) report.termination = Termination::max_iters;
  }

  report.final_point = std::move(state.w);
  report.final_value = state.value;
  report.final_grad_norm = state.grad_norm;
  return report;
}

/// Descent with a saddle-escape loop. Whenever the gradient norm falls
/// under the trigger, the minimum-curvature direction probe runs: the
/// direction toward the nearest global factor when the problem knows its
/// ground truth, a random direction otherwise. Negative probe curvature
/// adds a uniform perturbation inside a Frobenius ball and continues;
/// convergence is only declared when a probe comes back nonnegative.
template <SmoothProblem P>
SolveReport<typename P::Point> perturbed_descent(const P& problem, const typename P::Point& start,
                                                 const SolverConfig& cfg,
                                                 const SolveObserver<P>& observer = {}) {
  cfg.validate();
  if (!cfg.perturb) throw std::invalid_argument("perturbed_descent: cfg.perturb is required");
  using Point = typename P::Point;
  const auto& pc = *cfg.perturb;
  Rng rng(mix_seed({cfg.rng_seed, 0x9e24b7u}));

  SolveReport<Point> report;
  auto state = detail::evaluate(problem, start);
  report.trace.push_back({state.value, state.grad_norm});
  if (observer) observer(0, state.w, state.value, state.grad_norm);

  auto probe_direction = [&](const Point& w) -> Point {
    if constexpr (requires { problem.saddle_direction(w); }) {
      auto hint = problem.saddle_direction(w);
      if (hint && frobenius_norm(*hint) > 0.0) return *std::move(hint);
    }
    return detail::gaussian_like(w, rng);
  };

  auto probe_curvature = [&](const Point& w) -> double {
    Point dir = probe_direction(w);
    double norm = frobenius_norm(dir);
    if (norm == 0.0) return 0.0;
    return problem.hess_quadratic(w, dir) / (norm * norm);
  };

  double eta = cfg.step == StepRule::fixed ? cfg.eta : 1.0;
  index_t since_probe = pc.check_interval;  // probe immediately if triggered at the start

  for (index_t iter = 1; iter <= cfg.max_iters; ++iter) {
    if (!std::isfinite(state.value) || !std::isfinite(state.grad_norm)) {
      report.termination = Termination::diverged;
      report.diagnostic = "non-finite value or gradient";
      break;
    }

    bool triggered = state.grad_norm <= pc.trigger_grad_tol;
    bool at_tol = state.grad_norm <= cfg.grad_tol;
    if (at_tol || (triggered && since_probe >= pc.check_interval)) {
      since_probe = 0;
      double curv = probe_curvature(state.w);
      if (curv < 0.0) {
        if (report.perturbation_events >= pc.max_events) {
          report.termination = Termination::escape_failed;
          report.diagnostic = "perturbation budget exhausted with negative curvature remaining";
          break;
        }
        double radius = pc.radius * std::max(1.0, frobenius_norm(state.w));
        Point jump = detail::uniform_ball(state.w, radius, rng);
        state = detail::evaluate(problem, state.w + jump);
        ++report.perturbation_events;
        report.trace.push_back({state.value, state.grad_norm});
        if (observer) observer(iter, state.w, state.value, state.grad_norm);
        continue;
      }
      if (at_tol) {
        report.termination = Termination::converged;
        break;
      }
    }
    ++since_probe;

    Point candidate = state.w;
    double cand_value = 0.0;
    if (cfg.step == StepRule::fixed) {
      candidate = state.w - eta * state.grad;
      cand_value = problem.value(candidate);
    } else {
      eta = std::min(eta * 2.0, 1e8);
      bool accepted = false;
      double g2 = state.grad_norm * state.grad_norm;
      for (int bt = 0; bt < 80; ++bt) {
        candidate = state.w - eta * state.grad;
        cand_value = problem.value(candidate);
        if (std::isfinite(cand_value) && cand_value <= state.value - cfg.armijo_c * eta * g2) {
          accepted = true;
          break;
        }
        eta *= cfg.shrink;
      }
      if (!accepted) {
        // cannot decrease along the gradient: treat like a zero-gradient
        // point and let the probe decide next round
        double curv = probe_curvature(state.w);
        if (curv < 0.0 && report.perturbation_events < pc.max_events) {
          double radius = pc.radius * std::max(1.0, frobenius_norm(state.w));
          Point jump = detail::uniform_ball(state.w, radius, rng);
          state = detail::evaluate(problem, state.w + jump);
          ++report.perturbation_events;
          report.trace.push_back({state.value, state.grad_norm});
          continue;
        }
        report.termination = Termination::stalled;
        report.diagnostic = "line search exhausted at iteration " + std::to_string(iter);
        break;
      }
    }

    state.w = std::move(candidate);
    state.value = cand_value;
    state.grad = problem.gradient(state.w);
    state.grad_norm = frobenius_norm(state.grad);
    report.iterations_used = iter;
    report.trace.push_back({state.value, state.grad_norm});
    if (observer) observer(iter, state.w, state.value, state.grad_norm);

    if (iter == cfg.max_iters) report.termination = Termination::max_iters;
  }

  report.final_point = std::move(state.w);
  report.final_value = state.value;
  report.final_grad_norm = state.grad_norm;
  return report;
}

/// Projected descent on the unfactored variable: a gradient step followed
/// by a rank-r truncation each iteration. Stops when the projected step,
/// scaled back by the step size, falls under grad_tol.
inline SolveReport<DenseMatrix> svp_solve(const ObjectiveModel& model, index_t r,
                                          const SolverConfig& cfg,
                                          std::optional<DenseMatrix> start = std::nullopt) {
  cfg.validate();
  double eta = cfg.step == StepRule::fixed ? cfg.eta : 0.5;
  DenseMatrix x = start ? *std::move(start) : DenseMatrix(model.rows(), model.cols());

  SolveReport<DenseMatrix> report;
  for (index_t iter = 1; iter <= cfg.max_iters; ++iter) {
    DenseMatrix grad = model.gradient(x);
    DenseMatrix next = truncate_rank(x - eta * grad, r);
    double step_norm = frobenius_norm(next - x) / eta;
    report.trace.push_back({model.value(x), step_norm});
    if (!next.all_finite()) {
      report.termination = Termination::diverged;
      report.diagnostic = "non-finite iterate at iteration " + std::to_string(iter);
      break;
    }
    if (step_norm <= cfg.grad_tol) {
      report.termination = Termination::converged;
      break;
    }
    x = std::move(next);
    report.iterations_used = iter;
    if (iter == cfg.max_iters) report.termination = Termination::max_iters;
  }
  report.final_point = x;
  report.final_value = model.value(x);
  report.final_grad_norm = report.trace.empty() ? 0.0 : report.trace.back().grad_norm;
  return report;
}

inline DenseMatrix svp(const ObjectiveModel& model, index_t r, const SolverConfig& cfg,
                       std::optional<DenseMatrix> start = std::nullopt) {
  return svp_solve(model, r, cfg, std::move(start)).final_point;
}

/// Random starting factors with i.i.d. Normal(0, scale^2) entries.
inline FactorPair random_init(index_t n, index_t m, index_t r, double scale,
                              std::uint64_t rng_seed) {
  Rng rng(mix_seed({rng_seed, 0x171217u}));
  DenseMatrix u(n, r), v(m, r);
  for (double& e : u.entries()) e = scale * rng.gaussian();
  for (double& e : v.entries()) e = scale * rng.gaussian();
  return {std::move(u), std::move(v)};
}

}  // namespace saddlescape
