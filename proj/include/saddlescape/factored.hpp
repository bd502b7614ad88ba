#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "saddlescape/linalg.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/objectives.hpp"

namespace saddlescape {

/// The factored variable: U (n x r) and V (m x r) with the product view
/// X = U * V^T. Supports the vector-space operations the solvers need.
struct FactorPair {
  DenseMatrix U;
  DenseMatrix V;

  FactorPair() = default;
  FactorPair(DenseMatrix u, DenseMatrix v) : U(std::move(u)), V(std::move(v)) {
    if (U.cols() != V.cols() || U.cols() < 1) {
      throw std::invalid_argument("FactorPair: U and V must share a positive column count");
    }
  }

  index_t rank() const { return U.cols(); }
  index_t dimension() const { return (U.rows() + V.rows()) * U.cols(); }

  DenseMatrix product() const { return mat_nt(U, V); }

  /// [U; V], shape (n+m) x r.
  DenseMatrix stacked() const {
    DenseMatrix w(U.rows() + V.rows(), U.cols());
    for (index_t i = 0; i < U.rows(); ++i)
      for (index_t j = 0; j < U.cols(); ++j) w(i, j) = U(i, j);
    for (index_t i = 0; i < V.rows(); ++i)
      for (index_t j = 0; j < V.cols(); ++j) w(U.rows() + i, j) = V(i, j);
    return w;
  }

  static FactorPair from_stacked(const DenseMatrix& w, index_t n) {
    DenseMatrix u(n, w.cols()), v(w.rows() - n, w.cols());
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < w.cols(); ++j) u(i, j) = w(i, j);
    for (index_t i = 0; i < v.rows(); ++i)
      for (index_t j = 0; j < w.cols(); ++j) v(i, j) = w(n + i, j);
    return {std::move(u), std::move(v)};
  }

  FactorPair& operator+=(const FactorPair& o) {
    U += o.U;
    V += o.V;
    return *this;
  }
  FactorPair& operator-=(const FactorPair& o) {
    U -= o.U;
    V -= o.V;
    return *this;
  }
  FactorPair& operator*=(double s) {
    U *= s;
    V *= s;
    return *this;
  }
};

inline FactorPair operator+(FactorPair a, const FactorPair& b) { return a += b; }
inline FactorPair operator-(FactorPair a, const FactorPair& b) { return a -= b; }
inline FactorPair operator*(double s, FactorPair a) { return a *= s; }
inline FactorPair operator-(FactorPair a) { return a *= -1.0; }

inline double dot(const FactorPair& a, const FactorPair& b) {
  return dot(a.U, b.U) + dot(a.V, b.V);
}
inline double frobenius_norm(const FactorPair& a) { return std::sqrt(dot(a, a)); }
inline index_t dimension(const FactorPair& a) { return a.dimension(); }

/// Gram imbalance U^T U - V^T V; zero exactly on the balanced set.
inline DenseMatrix gram_imbalance(const FactorPair& w) {
  return mat_tn(w.U, w.U) - mat_tn(w.V, w.V);
}

/// Balance regularizer (mu/4) * ||U^T U - V^T V||_F^2.
inline double regularizer(const FactorPair& w, double mu) {
  double r = frobenius_norm(gram_imbalance(w));
  return 0.25 * mu * r * r;
}

/// Flat coordinates of a FactorPair: U row-major then V row-major. The
/// layout pairs with the bilinear-form oracle fed to symmetric_min_eig.
inline void pack(const FactorPair& w, std::span<double> out) {
  std::size_t nu = static_cast<std::size_t>(w.U.size());
  std::copy(w.U.data(), w.U.data() + w.U.size(), out.begin());
  std::copy(w.V.data(), w.V.data() + w.V.size(), out.begin() + static_cast<std::ptrdiff_t>(nu));
}

inline FactorPair unpack(std::span<const double> flat, index_t n, index_t m, index_t r) {
  DenseMatrix u(n, r), v(m, r);
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(n * r), u.data());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(n * r), flat.end(), v.data());
  return {std::move(u), std::move(v)};
}

/// The regularized factored objective rho(U, V) = f(U V^T) + g(U, V)
/// over a fixed model, rank budget, and balance weight mu > 0.
struct FactoredProblem {
  using Point = FactorPair;

  const ObjectiveModel* model = nullptr;
  index_t rank = 0;
  double mu = 1.0 / 16.0;

  FactoredProblem(const ObjectiveModel& m, index_t r, double mu_in)
      : model(&m), rank(r), mu(mu_in) {
    if (r < 1 || r > std::min(m.rows(), m.cols())) {
      throw std::invalid_argument("FactoredProblem: rank out of range");
    }
    if (mu <= 0.0) throw std::invalid_argument("FactoredProblem: mu must be positive");
  }

  void require_shape(const FactorPair& w) const {
    if (w.U.rows() != model->rows() || w.V.rows() != model->cols() || w.rank() != rank) {
      throw std::invalid_argument("FactoredProblem: factor shape mismatch");
    }
  }

  double value(const FactorPair& w) const;
  FactorPair gradient(const FactorPair& w) const;
  double hess_quadratic(const FactorPair& w, const FactorPair& d) const;
  std::optional<FactorPair> saddle_direction(const FactorPair& w) const;
};

/// Default balance weight: alpha/16 given a curvature lower bound, or the
/// plain 1/16 fallback when no estimate is available.
inline double default_mu(std::optional<double> alpha_hat = std::nullopt) {
  return alpha_hat ? *alpha_hat / 16.0 : 1.0 / 16.0;
}

inline double rho_value(const FactoredProblem& p, const FactorPair& w) {
  p.require_shape(w);
  return p.model->value(w.product()) + regularizer(w, p.mu);
}

inline FactorPair rho_gradient(const FactoredProblem& p, const FactorPair& w) {
  p.require_shape(w);
  DenseMatrix grad_f = p.model->gradient(w.product());
  DenseMatrix imbalance = gram_imbalance(w);
  DenseMatrix gu = grad_f * w.V + p.mu * (w.U * imbalance);
  DenseMatrix gv = mat_tn(grad_f, w.U) - p.mu * (w.V * imbalance);
  return {std::move(gu), std::move(gv)};
}

/// Hessian evaluator with the point-dependent quantities precomputed, so
/// repeated directional evaluations (eigensolves, dense materialization)
/// do not recompute the product or the model gradient.
class FactoredHessian {
 public:
  FactoredHessian(const FactoredProblem& p, const FactorPair& w)
      : problem_(&p), w_(&w), x_(w.product()), grad_f_(p.model->gradient(x_)),
        imbalance_(gram_imbalance(w)) {
    p.require_shape(w);
  }

  double quadratic(const FactorPair& d) const {
    const FactorPair& w = *w_;
    DenseMatrix mixed = mat_nt(d.U, w.V) + mat_nt(w.U, d.V);  // d_U V^T + U d_V^T
    double f_part = problem_->model->hess_bilinear(x_, mixed, mixed) +
                    2.0 * dot(grad_f_, mat_nt(d.U, d.V));
    // balance part: mu * (<E, F> + trace(A A) + ||A||_F^2) with
    // E = U^T U - V^T V, F = d_U^T d_U - d_V^T d_V, A = U^T d_U - V^T d_V
    DenseMatrix f_gram = mat_tn(d.U, d.U) - mat_tn(d.V, d.V);
    DenseMatrix a = mat_tn(w.U, d.U) - mat_tn(w.V, d.V);
    double trace_aa = 0.0;
    for (index_t i = 0; i < a.rows(); ++i)
      for (index_t j = 0; j < a.cols(); ++j) trace_aa += a(i, j) * a(j, i);
    double g_part = problem_->mu * (dot(imbalance_, f_gram) + trace_aa + dot(a, a));
    return f_part + g_part;
  }

  /// Polarization of the quadratic form; exact for quadratics and
  /// symmetric in its arguments by construction.
  double bilinear(const FactorPair& d1, const FactorPair& d2) const {
    double plus = quadratic(d1 + d2);
    double minus = quadratic(d1 - d2);
    return 0.25 * (plus - minus);
  }

  const DenseMatrix& product() const { return x_; }
  const DenseMatrix& model_gradient() const { return grad_f_; }

 private:
  const FactoredProblem* problem_;
  const FactorPair* w_;
  DenseMatrix x_;
  DenseMatrix grad_f_;
  DenseMatrix imbalance_;
};

inline double rho_hess_quadratic(const FactoredProblem& p, const FactorPair& w,
                                 const FactorPair& delta) {
  return FactoredHessian(p, w).quadratic(delta);
}

inline double rho_hess_bilinear(const FactoredProblem& p, const FactorPair& w,
                                const FactorPair& d1, const FactorPair& d2) {
  return FactoredHessian(p, w).bilinear(d1, d2);
}

inline double FactoredProblem::value(const FactorPair& w) const { return rho_value(*this, w); }
inline FactorPair FactoredProblem::gradient(const FactorPair& w) const {
  return rho_gradient(*this, w);
}
inline double FactoredProblem::hess_quadratic(const FactorPair& w, const FactorPair& d) const {
  return rho_hess_quadratic(*this, w, d);
}

/// Balanced factorization of a rank <= r matrix: U = Q_u S^(1/2),
/// V = Q_v S^(1/2) from a thin SVD, zero-padded when r exceeds the rank.
/// Both factors share singular values, and the stacked factor satisfies
/// sigma_l([U;V])^2 = 2 sigma_l(X) for every l up to the rank.
inline FactorPair balanced_factorization(const DenseMatrix& x_star, index_t r) {
  if (r < 1 || r > std::min(x_star.rows(), x_star.cols())) {
    throw std::invalid_argument("balanced_factorization: rank budget out of range");
  }
  SvdResult s = svd(x_star);
  double sigma1 = s.singular_values.empty() ? 0.0 : s.singular_values[0];
  if (static_cast<index_t>(s.singular_values.size()) > r && sigma1 > 0.0 &&
      s.singular_values[static_cast<std::size_t>(r)] > 1e-8 * sigma1) {
    throw std::invalid_argument("balanced_factorization: input rank exceeds budget");
  }
  DenseMatrix u(x_star.rows(), r), v(x_star.cols(), r);
  for (index_t j = 0; j < r; ++j) {
    double root = std::sqrt(std::max(0.0, s.singular_values[static_cast<std::size_t>(j)]));
    for (index_t i = 0; i < x_star.rows(); ++i) u(i, j) = s.left(i, j) * root;
    for (index_t i = 0; i < x_star.cols(); ++i) v(i, j) = s.right(i, j) * root;
  }
  return {std::move(u), std::move(v)};
}

inline std::optional<FactorPair> FactoredProblem::saddle_direction(const FactorPair& w) const {
  const DenseMatrix* truth = model->ground_truth();
  if (!truth) return std::nullopt;
  FactorPair w_star = balanced_factorization(*truth, rank);
  ProcrustesResult pr = procrustes_align(w.stacked(), w_star.stacked());
  FactorPair rotated(w_star.U * pr.rotation, w_star.V * pr.rotation);
  return w - rotated;
}

/// The factored objective without the balance term: h(U, V) = f(U V^T).
/// Used by the experiment arms that drop the regularizer; no landscape
/// guarantee is certified for it.
struct UnregularizedProblem {
  using Point = FactorPair;

  const ObjectiveModel* model = nullptr;
  index_t rank = 0;

  UnregularizedProblem(const ObjectiveModel& m, index_t r) : model(&m), rank(r) {
    if (r < 1 || r > std::min(m.rows(), m.cols())) {
      throw std::invalid_argument("UnregularizedProblem: rank out of range");
    }
  }

  double value(const FactorPair& w) const { return model->value(w.product()); }

  FactorPair gradient(const FactorPair& w) const {
    DenseMatrix grad_f = model->gradient(w.product());
    return {grad_f * w.V, mat_tn(grad_f, w.U)};
  }

  double hess_quadratic(const FactorPair& w, const FactorPair& d) const {
    DenseMatrix x = w.product();
    DenseMatrix mixed = mat_nt(d.U, w.V) + mat_nt(w.U, d.V);
    return model->hess_bilinear(x, mixed, mixed) +
           2.0 * dot(model->gradient(x), mat_nt(d.U, d.V));
  }

  std::optional<FactorPair> saddle_direction(const FactorPair& w) const {
    const DenseMatrix* truth = model->ground_truth();
    if (!truth) return std::nullopt;
    FactorPair w_star = balanced_factorization(*truth, rank);
    ProcrustesResult pr = procrustes_align(w.stacked(), w_star.stacked());
    FactorPair rotated(w_star.U * pr.rotation, w_star.V * pr.rotation);
    return w - rotated;
  }
};

}  // namespace saddlescape
