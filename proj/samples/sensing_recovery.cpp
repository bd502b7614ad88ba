// Recover a random rank-2 matrix from Gaussian measurements by factored
// gradient descent, then certify the converged point.

#include <iostream>

#include "saddlescape/saddlescape.hpp"

using namespace saddlescape;

int main() {
  const index_t n = 16, m = 16, r = 2;
  const std::uint64_t seed = 7;

  Rng rng(seed);
  DenseMatrix x_star = mat_nt(DenseMatrix::gaussian(n, r, rng), DenseMatrix::gaussian(m, r, rng));
  SensingModel model = gaussian_sensing_operator(n, m, 5 * r * (n + m - r), seed);
  model.observe(x_star);

  RscEstimate est = estimate_rsc(model, r, 500, seed);
  std::cout << "estimated curvature range: [" << est.alpha_hat << ", " << est.beta_hat << "]\n";

  FactoredProblem problem(model, r, default_mu(est.alpha_hat));
  SolverConfig cfg;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-10;
  auto report = gradient_descent(problem, random_init(n, m, r, 1.0, seed), cfg);

  std::cout << "termination: " << to_string(report.termination) << " after "
            << report.iterations_used << " iterations\n";
  std::cout << "relative error: "
            << frobenius_norm(report.final_point.product() - x_star) / frobenius_norm(x_star)
            << "\n";

  LandscapeCertificate cert =
      certify_point(problem, report.final_point, x_star, est.alpha_hat);
  std::cout << "certificate: " << to_string(cert.classification)
            << " (lambda_min = " << cert.lambda_min << ")\n";
  return 0;
}
