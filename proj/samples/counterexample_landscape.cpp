// Walk the weighted symmetric family across its critical transition: below
// a = 2 the analytic critical point is a strict saddle that descent
// escapes, above it the point is a spurious local minimum.

#include <iostream>

#include "saddlescape/saddlescape.hpp"

using namespace saddlescape;

int main() {
  for (double a : {0.0, 0.5, 1.0, 1.9, 2.1, 3.0, 5.0}) {
    CounterexampleModel model(a);
    auto [lam1, lam2] = model.critical_eigenvalues();
    LandscapeCertificate cert = certify_counterexample(a);
    std::cout << "a = " << a << ": eigenvalues (" << lam1 << ", " << lam2 << "), "
              << to_string(cert.classification)
              << (cert.spurious_local_min ? " [spurious local minimum]" : "") << "\n";
  }

  // escape from the saddle at a = 1 by perturbed descent
  CounterexampleProblem problem(1.0);
  SolverConfig cfg;
  cfg.grad_tol = 1e-12;
  cfg.perturb = SolverConfig::Perturb{};
  cfg.rng_seed = 3;
  auto report = perturbed_descent(problem, problem.model.critical_point(), cfg);
  std::cout << "escape at a=1: value " << problem.model.value(problem.model.critical_point())
            << " -> " << report.final_value << " (" << report.perturbation_events
            << " perturbations)\n";
  return 0;
}
