#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saddlescape/csv.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/rng.hpp"

namespace saddlescape {

/// Smooth objective over n x m matrices, exposed through its value,
/// gradient, and Hessian bilinear form. Models are immutable after
/// construction and safe to evaluate concurrently.
class ObjectiveModel {
 public:
  virtual ~ObjectiveModel() = default;
  virtual index_t rows() const = 0;
  virtual index_t cols() const = 0;
  virtual double value(const DenseMatrix& x) const = 0;
  virtual DenseMatrix gradient(const DenseMatrix& x) const = 0;
  virtual double hess_bilinear(const DenseMatrix& x, const DenseMatrix& g,
                               const DenseMatrix& h) const = 0;
  /// The known minimizer, when the model was built around one.
  virtual const DenseMatrix* ground_truth() const { return nullptr; }

 protected:
  void require_point(const DenseMatrix& x) const {
    if (x.rows() != rows() || x.cols() != cols()) {
      throw std::invalid_argument("ObjectiveModel: point shape mismatch");
    }
  }
};

// ---------------------------------------------------------------------------
// Linear measurements: f(X) = 1/2 * sum_i (<X, A_i> - y_i)^2
// ---------------------------------------------------------------------------

class SensingModel : public ObjectiveModel {
 public:
  SensingModel(index_t n, index_t m, const std::vector<DenseMatrix>& operators)
      : n_(n), m_(m), p_(static_cast<index_t>(operators.size())) {
    if (p_ < 1) throw std::invalid_argument("SensingModel: needs at least one measurement");
    flat_.resize(static_cast<std::size_t>(p_ * n_ * m_));
    for (index_t i = 0; i < p_; ++i) {
      const DenseMatrix& a = operators[static_cast<std::size_t>(i)];
      if (a.rows() != n_ || a.cols() != m_) {
        throw std::invalid_argument("SensingModel: operator shape mismatch");
      }
      std::copy(a.data(), a.data() + n_ * m_, flat_.begin() + static_cast<std::ptrdiff_t>(i * n_ * m_));
    }
    observations_.assign(static_cast<std::size_t>(p_), 0.0);
  }

  index_t rows() const override { return n_; }
  index_t cols() const override { return m_; }
  index_t measurements() const { return p_; }

  DenseMatrix sensing_matrix(index_t i) const {
    std::vector<double> e(flat_.begin() + static_cast<std::ptrdiff_t>(i * n_ * m_),
                          flat_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_ * m_));
    return DenseMatrix(n_, m_, std::move(e));
  }

  const std::vector<double>& observations() const { return observations_; }
  void set_observations(std::vector<double> y) {
    if (static_cast<index_t>(y.size()) != p_) {
      throw std::invalid_argument("SensingModel: observation length mismatch");
    }
    observations_ = std::move(y);
  }

  /// Record y = A(x_true) and remember the truth.
  void observe(const DenseMatrix& x_true) {
    require_point(x_true);
    observations_ = apply(x_true);
    truth_ = x_true;
  }

  const DenseMatrix* ground_truth() const override { return truth_ ? &*truth_ : nullptr; }

  std::optional<std::uint64_t> generator_seed() const { return generator_seed_; }
  void set_generator_seed(std::uint64_t s) { generator_seed_ = s; }

  /// A(X): all measurement inner products at once.
  std::vector<double> apply(const DenseMatrix& x) const {
    require_point(x);
    std::vector<double> out(static_cast<std::size_t>(p_));
    Eigen::Map<const detail::EigenRowMajor> op(flat_.data(), p_, n_ * m_);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n_ * m_);
    Eigen::Map<Eigen::VectorXd>(out.data(), p_).noalias() = op * xv;
    return out;
  }

  /// A^*(c) = sum_i c_i A_i.
  DenseMatrix adjoint(const std::vector<double>& coeffs) const {
    if (static_cast<index_t>(coeffs.size()) != p_) {
      throw std::invalid_argument("SensingModel::adjoint: length mismatch");
    }
    DenseMatrix out(n_, m_);
    Eigen::Map<const detail::EigenRowMajor> op(flat_.data(), p_, n_ * m_);
    Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), p_);
    Eigen::Map<Eigen::VectorXd>(out.data(), n_ * m_).noalias() = op.transpose() * c;
    return out;
  }

  double value(const DenseMatrix& x) const override {
    std::vector<double> r = apply(x);
    double s = 0.0;
    for (index_t i = 0; i < p_; ++i) {
      double d = r[static_cast<std::size_t>(i)] - observations_[static_cast<std::size_t>(i)];
      s += d * d;
    }
    return 0.5 * s;
  }

  DenseMatrix gradient(const DenseMatrix& x) const override {
    std::vector<double> r = apply(x);
    for (index_t i = 0; i < p_; ++i) r[static_cast<std::size_t>(i)] -= observations_[static_cast<std::size_t>(i)];
    return adjoint(r);
  }

  double hess_bilinear(const DenseMatrix& x, const DenseMatrix& g,
                       const DenseMatrix& h) const override {
    require_point(x);
    std::vector<double> ag = apply(g);
    if (&g == &h) {
      double s = 0.0;
      for (double v : ag) s += v * v;
      return s;
    }
    std::vector<double> ah = apply(h);
    double s = 0.0;
    for (index_t i = 0; i < p_; ++i) s += ag[static_cast<std::size_t>(i)] * ah[static_cast<std::size_t>(i)];
    return s;
  }

 private:
  SensingModel(index_t n, index_t m, index_t p, std::vector<double> flat)
      : n_(n), m_(m), p_(p), flat_(std::move(flat)) {
    observations_.assign(static_cast<std::size_t>(p_), 0.0);
  }
  friend SensingModel gaussian_sensing_operator(index_t, index_t, index_t, std::uint64_t);

  index_t n_, m_, p_;
  std::vector<double> flat_;  // p x (n*m), row i = measurement matrix i, row-major
  std::vector<double> observations_;
  std::optional<DenseMatrix> truth_;
  std::optional<std::uint64_t> generator_seed_;
};

/// p measurement matrices with i.i.d. Normal(0, 1/p) entries, generated
/// deterministically from the seed. Observations are filled later via
/// observe().
inline SensingModel gaussian_sensing_operator(index_t n, index_t m, index_t p,
                                              std::uint64_t rng_seed) {
  if (p < 1) throw std::invalid_argument("gaussian_sensing_operator: p must be positive");
  Rng rng(mix_seed({rng_seed, 0x5e5151u}));
  std::vector<double> flat(static_cast<std::size_t>(p * n * m));
  const double stddev = 1.0 / std::sqrt(static_cast<double>(p));
  for (double& v : flat) v = stddev * rng.gaussian();
  SensingModel model(n, m, p, std::move(flat));
  model.set_generator_seed(rng_seed);
  return model;
}

/// Dump a seeded sensing model: dimensions, seed, and observations only;
/// the measurement matrices are regenerated from the seed on load.
inline void save_sensing(const SensingModel& model, const std::string& path) {
  if (!model.generator_seed()) {
    throw std::invalid_argument("save_sensing: model was not built from a seed");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_sensing: cannot open '" + path + "'");
  f << "n,m,p,seed\n"
    << model.rows() << ',' << model.cols() << ',' << model.measurements() << ','
    << *model.generator_seed() << "\n";
  f << "y\n";
  for (double v : model.observations()) f << format_double(v) << '\n';
  if (!f) throw std::runtime_error("save_sensing: write failed for '" + path + "'");
}

inline SensingModel load_sensing(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_sensing: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || split_csv_line(line) != std::vector<std::string>{"n", "m", "p", "seed"}) {
    throw std::runtime_error("load_sensing: bad header in '" + path + "'");
  }
  if (!std::getline(f, line)) throw std::runtime_error("load_sensing: truncated file");
  auto fields = split_csv_line(line);
  if (fields.size() != 4) throw std::runtime_error("load_sensing: bad dimension row");
  index_t n = std::stoll(fields[0]), m = std::stoll(fields[1]), p = std::stoll(fields[2]);
  std::uint64_t seed = std::stoull(fields[3]);
  if (!std::getline(f, line) || line != "y") throw std::runtime_error("load_sensing: missing y section");
  std::vector<double> y;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    y.push_back(parse_double(line));
  }
  SensingModel model = gaussian_sensing_operator(n, m, p, seed);
  model.set_observations(std::move(y));
  return model;
}

// ---------------------------------------------------------------------------
// Weighted factorization target: f(X) = 1/2 * ||W .* (X - T)||_F^2
// with strictly positive weights.
// ---------------------------------------------------------------------------

class WeightedModel : public ObjectiveModel {
 public:
  WeightedModel(DenseMatrix weights, DenseMatrix target)
      : weights_(std::move(weights)), target_(std::move(target)) {
    weights_.require_same_shape(target_, "WeightedModel");
    double lo = weights_.data()[0], hi = lo;
    for (double v : weights_.entries()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo <= 0.0) throw std::invalid_argument("WeightedModel: weights must be strictly positive");
    min_weight_ = lo;
    max_weight_ = hi;
  }

  index_t rows() const override { return weights_.rows(); }
  index_t cols() const override { return weights_.cols(); }
  const DenseMatrix& weights() const { return weights_; }
  const DenseMatrix* ground_truth() const override { return &target_; }
  double min_weight() const { return min_weight_; }
  double max_weight() const { return max_weight_; }
  /// Exact curvature extremes: min(W)^2 and max(W)^2.
  std::pair<double, double> curvature_range() const {
    return {min_weight_ * min_weight_, max_weight_ * max_weight_};
  }

  double value(const DenseMatrix& x) const override {
    require_point(x);
    double s = 0.0;
    for (index_t k = 0; k < x.size(); ++k) {
      double d = weights_.data()[k] * (x.data()[k] - target_.data()[k]);
      s += d * d;
    }
    return 0.5 * s;
  }

  DenseMatrix gradient(const DenseMatrix& x) const override {
    require_point(x);
    DenseMatrix g(rows(), cols());
    for (index_t k = 0; k < x.size(); ++k) {
      double w = weights_.data()[k];
      g.data()[k] = w * w * (x.data()[k] - target_.data()[k]);
    }
    return g;
  }

  double hess_bilinear(const DenseMatrix& x, const DenseMatrix& g,
                       const DenseMatrix& h) const override {
    require_point(x);
    g.require_same_shape(h, "WeightedModel::hess_bilinear");
    require_point(g);
    double s = 0.0;
    for (index_t k = 0; k < g.size(); ++k) {
      double w = weights_.data()[k];
      s += w * w * g.data()[k] * h.data()[k];
    }
    return s;
  }

 private:
  DenseMatrix weights_;
  DenseMatrix target_;
  double min_weight_, max_weight_;
};

// ---------------------------------------------------------------------------
// Masked least squares: f(X) = 1/2 * sum_{(i,j) observed} (X_ij - T_ij)^2.
// The completion objective; the mask is a different object from the
// strictly positive weights of WeightedModel.
// ---------------------------------------------------------------------------

class MaskedLeastSquaresModel : public ObjectiveModel {
 public:
  MaskedLeastSquaresModel(index_t n, index_t m, std::vector<std::pair<index_t, index_t>> indices,
                          const DenseMatrix& target)
      : n_(n), m_(m), indices_(std::move(indices)), truth_(target) {
    if (target.rows() != n_ || target.cols() != m_) {
      throw std::invalid_argument("MaskedLeastSquaresModel: target shape mismatch");
    }
    values_.reserve(indices_.size());
    for (auto [i, j] : indices_) {
      if (i < 0 || i >= n_ || j < 0 || j >= m_) {
        throw std::invalid_argument("MaskedLeastSquaresModel: index out of range");
      }
      values_.push_back(target(i, j));
    }
  }

  index_t rows() const override { return n_; }
  index_t cols() const override { return m_; }
  index_t observed_count() const { return static_cast<index_t>(indices_.size()); }
  const std::vector<std::pair<index_t, index_t>>& indices() const { return indices_; }
  const DenseMatrix* ground_truth() const override { return &truth_; }

  /// Rows/columns with no observation carry no information about the
  /// corresponding factor rows; recovery is impossible regardless of the
  /// solver.
  bool has_unobserved_line() const {
    std::vector<char> row(static_cast<std::size_t>(n_), 0), col(static_cast<std::size_t>(m_), 0);
    for (auto [i, j] : indices_) {
      row[static_cast<std::size_t>(i)] = 1;
      col[static_cast<std::size_t>(j)] = 1;
    }
    return std::find(row.begin(), row.end(), 0) != row.end() ||
           std::find(col.begin(), col.end(), 0) != col.end();
  }

  double value(const DenseMatrix& x) const override {
    require_point(x);
    double s = 0.0;
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      double d = x(indices_[k].first, indices_[k].second) - values_[k];
      s += d * d;
    }
    return 0.5 * s;
  }

  DenseMatrix gradient(const DenseMatrix& x) const override {
    require_point(x);
    DenseMatrix g(n_, m_);
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      auto [i, j] = indices_[k];
      g(i, j) += x(i, j) - values_[k];
    }
    return g;
  }

  double hess_bilinear(const DenseMatrix& x, const DenseMatrix& g,
                       const DenseMatrix& h) const override {
    require_point(x);
    g.require_same_shape(h, "MaskedLeastSquaresModel::hess_bilinear");
    double s = 0.0;
    for (auto [i, j] : indices_) s += g(i, j) * h(i, j);
    return s;
  }

 private:
  index_t n_, m_;
  std::vector<std::pair<index_t, index_t>> indices_;
  std::vector<double> values_;
  DenseMatrix truth_;
};

/// Bernoulli mask with the given per-entry density, deterministic in the seed.
inline MaskedLeastSquaresModel bernoulli_mask_model(const DenseMatrix& target, double density,
                                                    std::uint64_t seed) {
  if (density <= 0.0 || density > 1.0) {
    throw std::invalid_argument("bernoulli_mask_model: density must be in (0, 1]");
  }
  Rng rng(mix_seed({seed, 0xb32a11u}));
  std::vector<std::pair<index_t, index_t>> idx;
  for (index_t i = 0; i < target.rows(); ++i)
    for (index_t j = 0; j < target.cols(); ++j)
      if (rng.uniform01() < density) idx.emplace_back(i, j);
  if (idx.empty()) idx.emplace_back(0, 0);  // degenerate draw: keep the model well-formed
  return {target.rows(), target.cols(), std::move(idx), target};
}

// ---------------------------------------------------------------------------
// Monotone link functions for sign observations.
// ---------------------------------------------------------------------------

class LinkFunction {
 public:
  enum class Kind { logistic, probit };

  static LinkFunction logistic() { return LinkFunction(Kind::logistic, 0.0); }
  static LinkFunction probit(double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("probit link: sigma must be positive");
    return LinkFunction(Kind::probit, sigma);
  }

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  std::string name() const { return kind_ == Kind::logistic ? "logistic" : "probit"; }

  /// q(x) = P(sign = +1 | x).
  double q(double x) const {
    if (kind_ == Kind::logistic) {
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      double e = std::exp(x);
      return e / (1.0 + e);
    }
    return 0.5 * std::erfc(-(x / sigma_) / kSqrt2);
  }

  double dq(double x) const {
    if (kind_ == Kind::logistic) {
      double p = q(x);
      return p * (1.0 - p);
    }
    return phi(x / sigma_) / sigma_;
  }

  double d2q(double x) const {
    if (kind_ == Kind::logistic) {
      double p = q(x);
      return p * (1.0 - p) * (1.0 - 2.0 * p);
    }
    double u = x / sigma_;
    return -u * phi(u) / (sigma_ * sigma_);
  }

 private:
  LinkFunction(Kind kind, double sigma) : kind_(kind), sigma_(sigma) {}
  static double phi(double u) { return std::exp(-0.5 * u * u) * kInvSqrt2Pi; }
  static constexpr double kSqrt2 = 1.4142135623730951;
  static constexpr double kInvSqrt2Pi = 0.3989422804014327;

  Kind kind_;
  double sigma_;
};

/// Second-derivative coefficients of the per-entry negative log-likelihood,
/// for the two observed signs.
inline double sign_loglik_curvature_pos(const LinkFunction& link, double x, double q_clamped) {
  double qp = link.dq(x), qpp = link.d2q(x);
  return (qp * qp - q_clamped * qpp) / (q_clamped * q_clamped);
}
inline double sign_loglik_curvature_neg(const LinkFunction& link, double x, double q_clamped) {
  double qp = link.dq(x), qpp = link.d2q(x);
  double om = 1.0 - q_clamped;
  return (qp * qp + om * qpp) / (om * om);
}

// ---------------------------------------------------------------------------
// Sign observations: negative log-likelihood of +-1 samples through a
// monotone link, plus an optional ridge term (eta/2) * ||X||_F^2.
// ---------------------------------------------------------------------------

class OneBitModel : public ObjectiveModel {
 public:
  OneBitModel(index_t n, index_t m, std::vector<std::pair<index_t, index_t>> indices,
              std::vector<int> signs, LinkFunction link, double ridge = 0.0)
      : n_(n), m_(m), indices_(std::move(indices)), signs_(std::move(signs)),
        link_(link), ridge_(ridge) {
    if (indices_.size() != signs_.size()) {
      throw std::invalid_argument("OneBitModel: index/sign length mismatch");
    }
    if (ridge_ < 0.0) throw std::invalid_argument("OneBitModel: ridge must be nonnegative");
    for (int s : signs_) {
      if (s != 1 && s != -1) throw std::invalid_argument("OneBitModel: signs must be +-1");
    }
    for (auto [i, j] : indices_) {
      if (i < 0 || i >= n_ || j < 0 || j >= m_) {
        throw std::invalid_argument("OneBitModel: index out of range");
      }
    }
  }

  OneBitModel(const OneBitModel& o)
      : n_(o.n_), m_(o.m_), indices_(o.indices_), signs_(o.signs_), link_(o.link_),
        ridge_(o.ridge_), truth_(o.truth_) {
    saturation_count_.store(o.saturation_count_.load());
  }
  OneBitModel& operator=(const OneBitModel& o) {
    if (this != &o) {
      n_ = o.n_; m_ = o.m_; indices_ = o.indices_; signs_ = o.signs_;
      link_ = o.link_; ridge_ = o.ridge_; truth_ = o.truth_;
      saturation_count_.store(o.saturation_count_.load());
    }
    return *this;
  }

  index_t rows() const override { return n_; }
  index_t cols() const override { return m_; }
  index_t observed_count() const { return static_cast<index_t>(indices_.size()); }
  const std::vector<std::pair<index_t, index_t>>& indices() const { return indices_; }
  const std::vector<int>& signs() const { return signs_; }
  const LinkFunction& link() const { return link_; }
  double ridge() const { return ridge_; }

  void set_truth(DenseMatrix x) { truth_ = std::move(x); }
  const DenseMatrix* ground_truth() const override { return truth_ ? &*truth_ : nullptr; }

  /// How many probability evaluations had to be clamped away from {0, 1}.
  std::int64_t saturation_count() const { return saturation_count_.load(); }
  void reset_saturation_count() const { saturation_count_.store(0); }

  double value(const DenseMatrix& x) const override {
    require_point(x);
    double s = 0.0;
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      auto [i, j] = indices_[k];
      double p = clamp_prob(link_.q(x(i, j)));
      s -= (signs_[k] == 1) ? std::log(p) : std::log(1.0 - p);
    }
    if (ridge_ > 0.0) {
      double fn = frobenius_norm(x);
      s += 0.5 * ridge_ * fn * fn;
    }
    return s;
  }

  DenseMatrix gradient(const DenseMatrix& x) const override {
    require_point(x);
    DenseMatrix g(n_, m_);
    if (ridge_ > 0.0) {
      for (index_t k = 0; k < x.size(); ++k) g.data()[k] = ridge_ * x.data()[k];
    }
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      auto [i, j] = indices_[k];
      double xv = x(i, j);
      double p = clamp_prob(link_.q(xv));
      double qp = link_.dq(xv);
      g(i, j) += (signs_[k] == 1) ? -qp / p : qp / (1.0 - p);
    }
    return g;
  }

  double hess_bilinear(const DenseMatrix& x, const DenseMatrix& g,
                       const DenseMatrix& h) const override {
    require_point(x);
    g.require_same_shape(h, "OneBitModel::hess_bilinear");
    require_point(g);
    double s = ridge_ > 0.0 ? ridge_ * dot(g, h) : 0.0;
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      auto [i, j] = indices_[k];
      double xv = x(i, j);
      double p = clamp_prob(link_.q(xv));
      double c = (signs_[k] == 1) ? sign_loglik_curvature_pos(link_, xv, p)
                                  : sign_loglik_curvature_neg(link_, xv, p);
      s += c * g(i, j) * h(i, j);
    }
    return s;
  }

  static constexpr double kProbClamp = 1e-12;

 private:
  double clamp_prob(double p) const {
    if (p < kProbClamp || p > 1.0 - kProbClamp) {
      saturation_count_.fetch_add(1, std::memory_order_relaxed);
      return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    }
    return p;
  }

  index_t n_, m_;
  std::vector<std::pair<index_t, index_t>> indices_;
  std::vector<int> signs_;
  LinkFunction link_;
  double ridge_;
  std::optional<DenseMatrix> truth_;
  mutable std::atomic<std::int64_t> saturation_count_{0};
};

/// Sample sign observations from a true matrix: each index is kept
/// independently with the given density, and its sign is +1 with
/// probability q(x_true[i,j]). Deterministic in the seed.
inline OneBitModel onebit_sample(const DenseMatrix& x_true, const LinkFunction& link,
                                 double density, std::uint64_t rng_seed, double ridge = 0.0) {
  if (density <= 0.0 || density > 1.0) {
    throw std::invalid_argument("onebit_sample: density must be in (0, 1]");
  }
  Rng rng(mix_seed({rng_seed, 0x1b17u}));
  std::vector<std::pair<index_t, index_t>> idx;
  std::vector<int> signs;
  for (index_t i = 0; i < x_true.rows(); ++i) {
    for (index_t j = 0; j < x_true.cols(); ++j) {
      double keep = rng.uniform01();
      double flip = rng.uniform01();
      if (keep < density) {
        idx.emplace_back(i, j);
        signs.push_back(flip < link.q(x_true(i, j)) ? 1 : -1);
      }
    }
  }
  if (idx.empty()) {
    idx.emplace_back(0, 0);
    signs.push_back(x_true(0, 0) >= 0.0 ? 1 : -1);
  }
  OneBitModel model(x_true.rows(), x_true.cols(), std::move(idx), std::move(signs), link, ridge);
  model.set_truth(x_true);
  return model;
}

/// Read observations from CSV rows "i,j,sign" (0-based indices, signs +-1).
inline OneBitModel onebit_from_csv(const std::string& path, index_t n, index_t m,
                                   const LinkFunction& link, double ridge = 0.0) {
  CsvTable t = read_csv(path);
  if (t.header != std::vector<std::string>{"i", "j", "sign"}) {
    throw std::runtime_error("onebit_from_csv: expected header 'i,j,sign' in '" + path + "'");
  }
  std::vector<std::pair<index_t, index_t>> idx;
  std::vector<int> signs;
  for (const auto& row : t.rows) {
    if (row.size() != 3) throw std::runtime_error("onebit_from_csv: bad row in '" + path + "'");
    idx.emplace_back(std::stoll(row[0]), std::stoll(row[1]));
    signs.push_back(std::stoi(row[2]));
  }
  return {n, m, std::move(idx), std::move(signs), link, ridge};
}

inline void onebit_to_csv(const OneBitModel& model, const std::string& path) {
  CsvTable t;
  t.header = {"i", "j", "sign"};
  for (std::size_t k = 0; k < model.indices().size(); ++k) {
    t.rows.push_back({std::to_string(model.indices()[k].first),
                      std::to_string(model.indices()[k].second),
                      std::to_string(model.signs()[k])});
  }
  write_csv(path, t);
}

/// Two-sided curvature constants of the sign log-likelihood over
/// |x| <= gamma. Logistic admits a closed form; probit is resolved by a
/// fine grid scan of the two coefficient expressions.
inline std::pair<double, double> onebit_curvature_constants(const LinkFunction& link,
                                                            double gamma,
                                                            double grid_step = 1e-3) {
  if (gamma <= 0.0) throw std::invalid_argument("onebit_curvature_constants: gamma must be positive");
  if (link.kind() == LinkFunction::Kind::logistic) {
    double eg = std::exp(gamma);
    double alpha = eg / ((1.0 + eg) * (1.0 + eg));
    return {alpha, 0.25};
  }
  double alpha = std::numeric_limits<double>::infinity();
  double beta = -std::numeric_limits<double>::infinity();
  index_t steps = static_cast<index_t>(std::ceil(2.0 * gamma / grid_step));
  for (index_t k = 0; k <= steps; ++k) {
    double x = -gamma + 2.0 * gamma * static_cast<double>(k) / static_cast<double>(steps);
    double p = std::clamp(link.q(x), OneBitModel::kProbClamp, 1.0 - OneBitModel::kProbClamp);
    double cpos = sign_loglik_curvature_pos(link, x, p);
    double cneg = sign_loglik_curvature_neg(link, x, p);
    alpha = std::min({alpha, cpos, cneg});
    beta = std::max({beta, cpos, cneg});
  }
  return {alpha, beta};
}

// ---------------------------------------------------------------------------
// Two-variable weighted symmetric factorization family. For a >= 0:
//
//   h(x, y) = (1+a)/2 * (x^2-1)^2 + (1+a)/2 * (y^2-1)^2 + (x*y - 1)^2
//
// has an analytic critical point (s, -s) with s = sqrt(a/(a+2)) whose
// Hessian eigenvalues cross zero at a = 2: a strict saddle below, a
// spurious local minimum above. The family realizes curvature ratios
// beta/alpha = 1 + a, so it bounds how far the ratio hypothesis of the
// saddle analysis can be relaxed.
// ---------------------------------------------------------------------------

class CounterexampleModel : public ObjectiveModel {
 public:
  explicit CounterexampleModel(double a) : a_(a) {
    if (a < 0.0) throw std::invalid_argument("CounterexampleModel: a must be nonnegative");
  }

  double a() const { return a_; }
  index_t rows() const override { return 2; }
  index_t cols() const override { return 1; }

  double value(const DenseMatrix& u) const override {
    require_point(u);
    double x = u(0, 0), y = u(1, 0);
    double tx = x * x - 1.0, ty = y * y - 1.0, c = x * y - 1.0;
    return 0.5 * (1.0 + a_) * (tx * tx + ty * ty) + c * c;
  }

  DenseMatrix gradient(const DenseMatrix& u) const override {
    require_point(u);
    double x = u(0, 0), y = u(1, 0);
    DenseMatrix g(2, 1);
    g(0, 0) = 2.0 * ((a_ + 1.0) * (x * x - 1.0) * x + y * (x * y - 1.0));
    g(1, 0) = 2.0 * ((a_ + 1.0) * (y * y - 1.0) * y + x * (x * y - 1.0));
    return g;
  }

  DenseMatrix hessian(const DenseMatrix& u) const {
    require_point(u);
    double x = u(0, 0), y = u(1, 0);
    DenseMatrix h(2, 2);
    h(0, 0) = 2.0 * (y * y + (3.0 * x * x - 1.0) * (a_ + 1.0));
    h(0, 1) = h(1, 0) = 2.0 * (2.0 * x * y - 1.0);
    h(1, 1) = 2.0 * (x * x + (3.0 * y * y - 1.0) * (a_ + 1.0));
    return h;
  }

  double hess_bilinear(const DenseMatrix& u, const DenseMatrix& g,
                       const DenseMatrix& h) const override {
    require_point(g);
    g.require_same_shape(h, "CounterexampleModel::hess_bilinear");
    DenseMatrix hs = hessian(u);
    return hs(0, 0) * g(0, 0) * h(0, 0) + hs(0, 1) * (g(0, 0) * h(1, 0) + g(1, 0) * h(0, 0)) +
           hs(1, 1) * g(1, 0) * h(1, 0);
  }

  /// The analytic critical point (s, -s), s = sqrt(a/(a+2)).
  DenseMatrix critical_point() const {
    double s = std::sqrt(a_ / (a_ + 2.0));
    DenseMatrix u(2, 1);
    u(0, 0) = s;
    u(1, 0) = -s;
    return u;
  }

  /// Hessian eigenvalues at the analytic critical point. The first
  /// (eigendirection (1,1)) equals 4(a-2)(a+1)/(a+2) and changes sign at
  /// a = 2; the second (eigendirection (1,-1)) equals 4a.
  std::pair<double, double> critical_eigenvalues() const {
    return {4.0 * (a_ - 2.0) * (a_ + 1.0) / (a_ + 2.0), 4.0 * a_};
  }

  /// A global minimizer of the family (all of (1,1) and (-1,-1) are).
  DenseMatrix global_minimizer() const {
    DenseMatrix u(2, 1);
    u(0, 0) = 1.0;
    u(1, 0) = 1.0;
    return u;
  }

  /// Curvature range of the underlying weighted objective: (1, (1+a)^2)
  /// scaled as entry weights squared -> alpha = 1, beta = 1 + a.
  std::pair<double, double> curvature_range() const { return {1.0, 1.0 + a_}; }

 private:
  double a_;
};

inline CounterexampleModel counterexample_family(double a) { return CounterexampleModel(a); }

/// Solver-facing adapter: the family optimized directly over its
/// two-dimensional variable.
struct CounterexampleProblem {
  using Point = DenseMatrix;
  CounterexampleModel model;

  explicit CounterexampleProblem(double a) : model(a) {}

  double value(const Point& u) const { return model.value(u); }
  Point gradient(const Point& u) const { return model.gradient(u); }
  double hess_quadratic(const Point& u, const Point& d) const {
    return model.hess_bilinear(u, d, d);
  }
  /// Direction toward the nearest global factor, used by the curvature
  /// probe in the escape loop.
  std::optional<Point> saddle_direction(const Point& u) const {
    DenseMatrix star = model.global_minimizer();
    DenseMatrix d_plus = u - star;
    DenseMatrix d_minus = u + star;
    return frobenius_norm(d_plus) <= frobenius_norm(d_minus) ? d_plus : d_minus;
  }
};

}  // namespace saddlescape
