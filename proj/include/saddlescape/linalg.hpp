#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "saddlescape/matrix.hpp"
#include "saddlescape/rng.hpp"

namespace saddlescape {

/// Thin SVD A = left * diag(singular_values) * right^T, with the values
/// sorted nonincreasing and both factors having orthonormal columns.
struct SvdResult {
  DenseMatrix left;                     // rows x k, k = min(rows, cols)
  std::vector<double> singular_values;  // length k, nonincreasing
  DenseMatrix right;                    // cols x k

  DenseMatrix reconstruct() const {
    DenseMatrix scaled = left;
    for (index_t i = 0; i < scaled.rows(); ++i)
      for (index_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= singular_values[static_cast<std::size_t>(j)];
    return mat_nt(scaled, right);
  }
};

/// Thin SVD; empty result if the decomposition did not converge.
inline std::optional<SvdResult> try_svd(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> dec(detail::as_eigen(a),
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) return std::nullopt;
  index_t k = std::min(a.rows(), a.cols());
  SvdResult out;
  out.left = DenseMatrix(a.rows(), k);
  out.right = DenseMatrix(a.cols(), k);
  detail::as_eigen(out.left) = dec.matrixU();
  detail::as_eigen(out.right) = dec.matrixV();
  out.singular_values.assign(dec.singularValues().data(), dec.singularValues().data() + k);
  return out;
}

inline SvdResult svd(const DenseMatrix& a) {
  auto r = try_svd(a);
  if (!r) throw std::runtime_error("svd: did not converge");
  return *std::move(r);
}

/// Best rank-r approximation in Frobenius norm (top-r truncation).
inline DenseMatrix truncate_rank(const DenseMatrix& a, index_t r) {
  if (r < 1 || r > std::min(a.rows(), a.cols())) {
    throw std::invalid_argument("truncate_rank: r out of range");
  }
  SvdResult s = svd(a);
  DenseMatrix scaled(a.rows(), r);
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < r; ++j) scaled(i, j) = s.left(i, j) * s.singular_values[static_cast<std::size_t>(j)];
  DenseMatrix right_r(a.cols(), r);
  for (index_t i = 0; i < a.cols(); ++i)
    for (index_t j = 0; j < r; ++j) right_r(i, j) = s.right(i, j);
  return mat_nt(scaled, right_r);
}

struct ProcrustesResult {
  DenseMatrix rotation;  // r x r orthonormal
  double distance;       // attained min of ||C - D*R||_F
};

/// Orthogonal alignment: R minimizing ||C - D*R||_F over orthonormal R,
/// computed from the SVD of D^T C. With a rank-deficient D^T C the
/// minimizer is not unique; any SVD-derived one is returned.
inline ProcrustesResult procrustes_align(const DenseMatrix& c, const DenseMatrix& d) {
  if (c.rows() != d.rows() || c.cols() != d.cols()) {
    throw std::invalid_argument("procrustes_align: shape mismatch");
  }
  SvdResult s = svd(mat_tn(d, c));
  DenseMatrix r = mat_nt(s.left, s.right);
  return {r, frobenius_norm(c - d * r)};
}

/// Symmetric bilinear form oracle over flat coordinate vectors of a fixed
/// dimension. The caller guarantees symmetry and bilinearity.
using BilinearForm = std::function<double(std::span<const double>, std::span<const double>)>;

struct MinEigOptions {
  index_t dense_threshold = 2500;  // materialize and solve densely up to here
  double tol = 1e-6;               // relative eigenvalue accuracy
  index_t max_subspace = 400;      // Krylov dimension cap for the iterative path
  std::uint64_t seed = 0x5eed;     // start vector for the iterative path
};

struct MinEigResult {
  double lambda_min = 0.0;
  std::vector<double> eigenvector;
  bool converged = false;  // false: iteration cap hit, best estimate attached
};

namespace detail {

inline MinEigResult min_eig_dense(const BilinearForm& form, index_t d) {
  std::vector<double> ei(static_cast<std::size_t>(d), 0.0), ej(static_cast<std::size_t>(d), 0.0);
  Eigen::MatrixXd h(d, d);
  for (index_t i = 0; i < d; ++i) {
    ei[static_cast<std::size_t>(i)] = 1.0;
    for (index_t j = 0; j <= i; ++j) {
      ej[static_cast<std::size_t>(j)] = 1.0;
      double v = form(ei, ej);
      h(i, j) = v;
      h(j, i) = v;
      ej[static_cast<std::size_t>(j)] = 0.0;
    }
    ei[static_cast<std::size_t>(i)] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  MinEigResult out;
  out.lambda_min = es.eigenvalues()(0);
  out.eigenvector.assign(es.eigenvectors().col(0).data(), es.eigenvectors().col(0).data() + d);
  out.converged = (es.info() == Eigen::Success);
  return out;
}

// Krylov (Lanczos) minimization of the Rayleigh quotient with full
// reorthogonalization. One matrix-vector product costs d oracle calls.
inline MinEigResult min_eig_krylov(const BilinearForm& form, index_t d, const MinEigOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(d);
  auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
    std::vector<double> e(n, 0.0);
    for (index_t i = 0; i < d; ++i) {
      e[static_cast<std::size_t>(i)] = 1.0;
      y[static_cast<std::size_t>(i)] = form(e, x);
      e[static_cast<std::size_t>(i)] = 0.0;
    }
  };

  Rng rng(mix_seed({opts.seed, static_cast<std::uint64_t>(d)}));
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), w(n);
  for (double& x : v) x = rng.gaussian();
  double nv = 0.0;
  for (double x : v) nv += x * x;
  nv = std::sqrt(nv);
  for (double& x : v) x /= nv;
  basis.push_back(v);

  const index_t kmax = std::min<index_t>(d, opts.max_subspace);
  MinEigResult best;
  double prev_theta = 0.0;
  bool have_prev = false;

  for (index_t k = 0; k < kmax; ++k) {
    matvec(basis.back(), w);
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += basis.back()[i] * w[i];
    alpha.push_back(a);
    // two passes of full reorthogonalization
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += q[i] * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
      }
    }
    double b = 0.0;
    for (double x : w) b += x * x;
    b = std::sqrt(b);

    // Ritz values of the current tridiagonal section
    const index_t m = static_cast<index_t>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (index_t i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) {
        t(i, i + 1) = beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    double theta = es.eigenvalues()(0);
    Eigen::VectorXd y = es.eigenvectors().col(0);

    best.lambda_min = theta;
    best.eigenvector.assign(n, 0.0);
    for (index_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        best.eigenvector[j] += y(i) * basis[static_cast<std::size_t>(i)][j];

    const double scale = std::max(1.0, std::abs(theta));
    const double residual = b * std::abs(y(m - 1));
    if (residual <= opts.tol * scale && (have_prev && std::abs(theta - prev_theta) <= opts.tol * scale)) {
      best.converged = true;
      return best;
    }
    prev_theta = theta;
    have_prev = true;

    if (b <= 1e-14 * scale) {  // invariant subspace reached
      best.converged = true;
      return best;
    }
    beta.push_back(b);
    for (double& x : w) x /= b;
    basis.push_back(w);
  }
  best.converged = false;
  return best;
}

}  // namespace detail

/// Smallest eigenvalue and eigenvector of the symmetric matrix implied by
/// a bilinear-form oracle of dimension d. Small problems are materialized
/// column by column and solved densely; larger ones go through the
/// Krylov path, whose failure to converge is reported rather than thrown.
inline MinEigResult symmetric_min_eig(const BilinearForm& form, index_t d,
                                      const MinEigOptions& opts = {}) {
  if (d < 1) throw std::invalid_argument("symmetric_min_eig: dimension must be positive");
  if (d <= opts.dense_threshold) return detail::min_eig_dense(form, d);
  return detail::min_eig_krylov(form, d, opts);
}

/// Numeric rank: count of singular values above rel_tol * sigma_1.
inline index_t numeric_rank(const DenseMatrix& a, double rel_tol = 1e-8) {
  SvdResult s = svd(a);
  if (s.singular_values.empty() || s.singular_values[0] <= 0.0) return 0;
  double cut = rel_tol * s.singular_values[0];
  index_t r = 0;
  for (double v : s.singular_values)
    if (v > cut) ++r;
  return r;
}

/// Random orthonormal matrix via QR of a Gaussian draw.
inline DenseMatrix random_orthonormal(index_t n, Rng& rng) {
  DenseMatrix g = DenseMatrix::gaussian(n, n, rng);
  Eigen::MatrixXd m = detail::as_eigen(g);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  // fix signs so the result is unique given the draw
  Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (index_t j = 0; j < n; ++j)
    if (rmat(j, j) < 0) q.col(j) *= -1.0;
  DenseMatrix out(n, n);
  detail::as_eigen(out) = q;
  return out;
}

}  // namespace saddlescape
