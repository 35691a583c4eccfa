#pragma once

#include <Eigen/Core>

#include <vector>

namespace das::additive {

/// Cubic B-spline basis over [lo, hi] with interior knots at the empirical
/// quintiles of the fitting sample (duplicates dropped).
class SplineBasis {
 public:
  static constexpr int kDegree = 3;
  static constexpr int kDefaultSize = 8;

  SplineBasis() = default;
  SplineBasis(const Eigen::Ref<const Eigen::VectorXd>& sample, int size = kDefaultSize);

  int size() const noexcept { return static_cast<int>(knots_.size()) - kDegree - 1; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  /// n x size() matrix of basis values; points outside the fitted range are
  /// clamped to it. Rows sum to one.
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<double> knots_;
};

/// Centred spline columns for one covariate with the last basis function
/// dropped, so the groups stay identifiable next to an intercept.
Eigen::MatrixXd covariate_block(const Eigen::Ref<const Eigen::VectorXd>& x, int size = SplineBasis::kDefaultSize);

struct LeastSquaresFit {
  Eigen::VectorXd coefficients;
  double rss = 0.0;
  /// Residual degrees of freedom, n - columns.
  double dof = 0.0;
  /// True when the tiny default ridge was not enough and a stronger one
  /// had to be used.
  bool stabilized = false;
};

/// Normal equations of one response against one design, shared by the full
/// model and every nested model that drops a subset of columns.
class NormalEquations {
 public:
  NormalEquations(Eigen::MatrixXd design, Eigen::VectorXd y);

  Eigen::Index rows() const noexcept { return design_.rows(); }
  Eigen::Index cols() const noexcept { return design_.cols(); }

  /// Least squares on the listed columns with a 1e-8 relative ridge.
  LeastSquaresFit fit(const std::vector<Eigen::Index>& columns) const;

 private:
  Eigen::MatrixXd design_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd moment_;
};

}  // namespace das::additive
