#pragma once

// Shared oracles for the test suites. These stay independent of the
// library paths they check: finite differences for derivatives, brute
// enumeration for formulas.

#include <cmath>
#include <functional>

#include "saddlescape/factored.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/objectives.hpp"

namespace testutil {

using saddlescape::DenseMatrix;
using saddlescape::FactorPair;
using saddlescape::index_t;

/// Central-difference gradient of a scalar function of a matrix.
inline DenseMatrix numeric_gradient(const std::function<double(const DenseMatrix&)>& f,
                                    const DenseMatrix& x, double h = 1e-5) {
  DenseMatrix g(x.rows(), x.cols());
  DenseMatrix probe = x;
  for (index_t i = 0; i < x.rows(); ++i) {
    for (index_t j = 0; j < x.cols(); ++j) {
      double orig = probe(i, j);
      probe(i, j) = orig + h;
      double fp = f(probe);
      probe(i, j) = orig - h;
      double fm = f(probe);
      probe(i, j) = orig;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

/// Second directional difference (f(x+td) - 2 f(x) + f(x-td)) / t^2.
inline double second_difference(const std::function<double(const DenseMatrix&)>& f,
                                const DenseMatrix& x, const DenseMatrix& d, double t = 1e-4) {
  return (f(x + t * d) - 2.0 * f(x) + f(x - t * d)) / (t * t);
}

inline double rel_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Directional derivative of rho along a factor direction by central
/// differences.
template <typename Problem>
double directional_derivative(const Problem& problem, const FactorPair& w, const FactorPair& d,
                              double h = 1e-6) {
  return (problem.value(w + h * d) - problem.value(w - h * d)) / (2.0 * h);
}

template <typename Problem>
double second_difference_factored(const Problem& problem, const FactorPair& w,
                                  const FactorPair& d, double t = 1e-4) {
  return (problem.value(w + t * d) - 2.0 * problem.value(w) + problem.value(w - t * d)) / (t * t);
}

}  // namespace testutil
