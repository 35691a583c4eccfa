#pragma once

// Kernel (Stein identity) estimators of the score and of its Jacobian.
//
// With an RBF kernel k(x, y) = exp(-|x - y|^2 / (2 h^2)) over the n samples,
// the first-order Stein identity gives per-sample score estimates
//
//   G = -(K + n eta I)^{-1} B,   B_kj = sum_i d k(x_k, x_i) / d x_ij,
//
// and the second-order identity estimates d_c d_j p / p = d_c s_j + s_c s_j,
// from which the Jacobian entries follow by subtracting G_c G_j. Every
// right-hand side shares one Cholesky factorization of K + n eta I.

#include "das/error.hpp"
#include "das/graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace das {

struct SteinConfig {
  enum class Bandwidth { Median, Fixed };

  Bandwidth bandwidth = Bandwidth::Median;
  double fixed_bandwidth = 1.0;
  /// Ridge; the kernel diagonal receives n * eta.
  double eta = 3e-4;
  /// Maximum number of right-hand sides per triangular solve batch.
  Index chunk = 256;

  void validate() const {
    if (!(eta > 0.0)) throw ValidationError("Stein ridge eta must be > 0");
    if (bandwidth == Bandwidth::Fixed && !(fixed_bandwidth > 0.0))
      throw ValidationError("fixed Stein bandwidth must be > 0");
    if (chunk < 1) throw ValidationError("Stein solve chunk must be >= 1");
  }
};

/// Per-sample estimates of one row of the score Jacobian, before taking
/// absolute values. entries(i, k) estimates d s_row / d x_{columns[k]} at
/// sample i.
struct ScoreJacobianRows {
  Index row = 0;
  Eigen::MatrixXd entries;
  std::vector<Index> columns;
};

/// Median of pairwise Euclidean distances between rows, over at most 1000
/// rows (a fixed-seed subsample beyond that). Falls back to 1 when the
/// median is zero.
template <typename Derived>
double median_heuristic(const Eigen::MatrixBase<Derived>& x) {
  constexpr Index kMaxRows = 1000;
  const Index n = x.rows();
  if (n < 2) throw InsufficientSamples("median heuristic needs at least 2 rows");

  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  if (n > kMaxRows) {
    std::mt19937_64 rng(0x5eed5eedULL);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(kMaxRows));
    std::sort(rows.begin(), rows.end());
  }

  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      dist.push_back(static_cast<double>((x.row(rows[a]) - x.row(rows[b])).norm()));

  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  return median > 0.0 ? median : 1.0;
}

/// Kernel system over one data matrix: bandwidth, kernel matrix and the
/// factorized ridge system, plus cached first-order score estimates.
template <typename Scalar>
class SteinKernel {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  template <typename Derived>
  SteinKernel(const Eigen::MatrixBase<Derived>& x, const SteinConfig& cfg) : chunk_(cfg.chunk) {
    cfg.validate();
    const Index n = x.rows();
    if (n < 2) throw InsufficientSamples("Stein estimators need at least 2 rows");

    x_ = x.template cast<Scalar>();
    x_.rowwise() -= x_.colwise().mean();
    h_ = static_cast<Scalar>(cfg.bandwidth == SteinConfig::Bandwidth::Fixed ? cfg.fixed_bandwidth
                                                                             : median_heuristic(x_));

    const Vector sq = x_.rowwise().squaredNorm();
    k_ = x_ * x_.transpose();
    k_ = ((k_ * Scalar(-2)).colwise() + sq).rowwise() + sq.transpose();
    const Scalar scale = Scalar(-1) / (Scalar(2) * h_ * h_);
    k_ = (k_.array().max(Scalar(0)) * scale).exp().matrix();
    k_.diagonal().setOnes();
    ksum_ = k_.rowwise().sum();
    kx_ = k_ * x_;

    ridge_ = static_cast<double>(n) * cfg.eta;
    for (int attempt = 0; attempt < 2; ++attempt) {
      Matrix system = k_;
      system.diagonal().array() += static_cast<Scalar>(ridge_);
      llt_.compute(system);
      if (llt_.info() == Eigen::Success) break;
      if (attempt == 1)
        throw NumericalFailure("kernel system is not positive definite after increasing the ridge to " +
                               std::to_string(ridge_));
      ridge_ *= 10.0;
    }

    const Scalar h2 = h_ * h_;
    Matrix b = (x_.array().colwise() * ksum_.array() - kx_.array()).matrix() / h2;
    g_ = -solve(b);
  }

  Index samples() const noexcept { return x_.rows(); }
  Index dims() const noexcept { return x_.cols(); }
  Scalar bandwidth() const noexcept { return h_; }
  /// Ridge actually applied to the kernel diagonal.
  double ridge() const noexcept { return ridge_; }

  /// First-order estimates: row i is the score at sample i.
  const Matrix& gradient() const noexcept { return g_; }

  /// Column j holds estimates of d s_j / d x_j at every sample.
  Matrix hessian_diag() const {
    const Scalar h2 = h_ * h_;
    const Scalar h4 = h2 * h2;
    const Matrix kx2 = k_ * x_.cwiseAbs2();
    Matrix second =
        ((x_.cwiseAbs2().array().colwise() * ksum_.array() - Scalar(2) * x_.array() * kx_.array() + kx2.array()) / h4)
            .matrix();
    second.colwise() -= ksum_ / h2;
    return solve(second) - g_.cwiseAbs2();
  }

  /// Column j holds estimates of d s_c / d x_j at every sample.
  Matrix hessian_row(Index c) const {
    if (c < 0 || c >= dims()) throw ValidationError("Jacobian row " + std::to_string(c) + " out of range");
    const Scalar h2 = h_ * h_;
    const Scalar h4 = h2 * h2;
    const Vector xc = x_.col(c);
    const Matrix kxc = k_ * (x_.array().colwise() * xc.array()).matrix();
    Matrix second = ((x_.array().colwise() * (xc.array() * ksum_.array()) - kx_.array().colwise() * xc.array() -
                      x_.array().colwise() * kx_.col(c).array() + kxc.array()) /
                     h4)
                        .matrix();
    second.col(c) -= ksum_ / h2;
    return solve(second) - (g_.array().colwise() * g_.col(c).array()).matrix();
  }

 private:
  Matrix solve(const Matrix& rhs) const {
    Matrix out(rhs.rows(), rhs.cols());
    for (Index start = 0; start < rhs.cols(); start += chunk_) {
      const Index width = std::min(chunk_, rhs.cols() - start);
      out.middleCols(start, width) = llt_.solve(rhs.middleCols(start, width));
    }
    return out;
  }

  Index chunk_;
  Matrix x_;
  Scalar h_ = Scalar(1);
  Matrix k_;
  Vector ksum_;
  Matrix kx_;
  double ridge_ = 0.0;
  Eigen::LLT<Matrix> llt_;
  Matrix g_;
};

template <typename Derived>
auto stein_gradient(const Eigen::MatrixBase<Derived>& x, const SteinConfig& cfg) {
  return SteinKernel<typename Derived::Scalar>(x, cfg).gradient();
}

template <typename Derived>
auto stein_hessian_diag(const Eigen::MatrixBase<Derived>& x, const SteinConfig& cfg) {
  return SteinKernel<typename Derived::Scalar>(x, cfg).hessian_diag();
}

/// Row `l` of the Jacobian over the columns listed in `active` (node ids
/// into `x`). `l` must be one of them.
template <typename Derived>
ScoreJacobianRows stein_hessian_row(const Eigen::MatrixBase<Derived>& x, Index l, const std::vector<Index>& active,
                                    const SteinConfig& cfg) {
  const auto it = std::find(active.begin(), active.end(), l);
  if (it == active.end()) throw ValidationError("row " + std::to_string(l) + " is not an active column");
  const SteinKernel<double> kernel(x(Eigen::all, active).template cast<double>(), cfg);
  ScoreJacobianRows out;
  out.row = l;
  out.columns = active;
  out.entries = kernel.hessian_row(static_cast<Index>(it - active.begin()));
  return out;
}

template <typename Derived>
ScoreJacobianRows stein_hessian_row(const Eigen::MatrixBase<Derived>& x, Index l, const SteinConfig& cfg) {
  std::vector<Index> all(static_cast<std::size_t>(x.cols()));
  std::iota(all.begin(), all.end(), Index{0});
  return stein_hessian_row(x, l, all, cfg);
}

}  // namespace das
