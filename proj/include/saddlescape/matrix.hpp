#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saddlescape/rng.hpp"

namespace saddlescape {

using index_t = std::int64_t;

/// Dense real matrix in row-major order; the universal numeric carrier of
/// the library. Public constructors reject non-finite entries, so a
/// DenseMatrix obtained from user data is always finite; results of
/// internal arithmetic are only checked where an algorithm needs to
/// detect divergence.
class DenseMatrix {
 public:
  DenseMatrix() = default;  // empty 0x0 placeholder

  DenseMatrix(index_t rows, index_t cols)
      : rows_(rows), cols_(cols), entries_(check_dims(rows, cols), 0.0) {}

  DenseMatrix(index_t rows, index_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (static_cast<index_t>(entries_.size()) != check_dims(rows, cols)) {
      throw std::invalid_argument("DenseMatrix: entries length != rows*cols");
    }
    for (double v : entries_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("DenseMatrix: non-finite entry");
      }
    }
  }

  static DenseMatrix identity(index_t n) {
    DenseMatrix a(n, n);
    for (index_t i = 0; i < n; ++i) a(i, i) = 1.0;
    return a;
  }

  /// Rectangular matrix with the given values on the main diagonal.
  static DenseMatrix diagonal(index_t rows, index_t cols, std::span<const double> values) {
    DenseMatrix a(rows, cols);
    index_t k = std::min(rows, cols);
    if (static_cast<index_t>(values.size()) < k) {
      throw std::invalid_argument("DenseMatrix::diagonal: too few values");
    }
    for (index_t i = 0; i < k; ++i) {
      if (!std::isfinite(values[i])) {
        throw std::invalid_argument("DenseMatrix::diagonal: non-finite entry");
      }
      a(i, i) = values[i];
    }
    return a;
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    index_t nr = static_cast<index_t>(rows.size());
    index_t nc = nr > 0 ? static_cast<index_t>(rows.begin()->size()) : 0;
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(nr * nc));
    for (const auto& row : rows) {
      if (static_cast<index_t>(row.size()) != nc) {
        throw std::invalid_argument("DenseMatrix::from_rows: ragged rows");
      }
      e.insert(e.end(), row.begin(), row.end());
    }
    return DenseMatrix(nr, nc, std::move(e));
  }

  static DenseMatrix gaussian(index_t rows, index_t cols, Rng& rng, double stddev = 1.0) {
    DenseMatrix a(rows, cols);
    for (double& v : a.entries_) v = stddev * rng.gaussian();
    return a;
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t size() const { return rows_ * cols_; }
  bool empty() const { return entries_.empty(); }

  double& operator()(index_t i, index_t j) { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(index_t i, index_t j) const { return entries_[static_cast<std::size_t>(i * cols_ + j)]; }

  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }

  bool all_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    require_same_shape(o, "+=");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    require_same_shape(o, "-=");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
  }
  DenseMatrix& operator*=(double s) {
    for (double& v : entries_) v *= s;
    return *this;
  }

  void require_same_shape(const DenseMatrix& o, const char* what) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument(std::string("DenseMatrix shape mismatch in ") + what);
    }
  }

 private:
  static index_t check_dims(index_t rows, index_t cols) {
    if (rows <= 0 || cols <= 0) {
      throw std::invalid_argument("DenseMatrix: dimensions must be positive");
    }
    return rows * cols;
  }

  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<double> entries_;
};

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
inline DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }
inline DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }
inline DenseMatrix operator-(DenseMatrix a) { return a *= -1.0; }

inline double dot(const DenseMatrix& a, const DenseMatrix& b) {
  a.require_same_shape(b, "dot");
  const double* x = a.data();
  const double* y = b.data();
  double s = 0.0;
  for (index_t k = 0; k < a.size(); ++k) s += x[k] * y[k];
  return s;
}

inline double frobenius_norm(const DenseMatrix& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.entries()) m = std::max(m, std::abs(v));
  return m;
}

inline DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  a.require_same_shape(b, "hadamard");
  DenseMatrix c(a.rows(), a.cols());
  for (index_t k = 0; k < a.size(); ++k) c.data()[k] = a.data()[k] * b.data()[k];
  return c;
}

namespace detail {

using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const EigenRowMajor> as_eigen(const DenseMatrix& a) {
  return {a.data(), a.rows(), a.cols()};
}
inline Eigen::Map<EigenRowMajor> as_eigen(DenseMatrix& a) {
  return {a.data(), a.rows(), a.cols()};
}

}  // namespace detail

/// A * B
inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  detail::as_eigen(c).noalias() = detail::as_eigen(a) * detail::as_eigen(b);
  return c;
}

/// A^T * B without forming the transpose.
inline DenseMatrix mat_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("mat_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  detail::as_eigen(c).noalias() = detail::as_eigen(a).transpose() * detail::as_eigen(b);
  return c;
}

/// A * B^T without forming the transpose.
inline DenseMatrix mat_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("mat_nt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  detail::as_eigen(c).noalias() = detail::as_eigen(a) * detail::as_eigen(b).transpose();
  return c;
}

}  // namespace saddlescape
