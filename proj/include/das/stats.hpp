#pragma once

#include <Eigen/Core>

namespace das::stats {

enum class Alternative { Greater, TwoSided };

struct TestResult {
  double statistic = 0.0;
  /// Welch-Satterthwaite degrees of freedom; may be fractional.
  double dof = 0.0;
  double p_value = 1.0;
  Alternative alternative = Alternative::Greater;
  /// Set when both samples had exactly zero variance; see welch_one_sided.
  bool zero_variance_pair = false;
};

template <typename Derived>
double mean(const Eigen::DenseBase<Derived>& x) {
  return static_cast<double>(x.mean());
}

/// Unbiased sample variance.
template <typename Derived>
double variance(const Eigen::DenseBase<Derived>& x) {
  const double m = mean(x);
  return (x.derived().array().template cast<double>() - m).square().sum() / static_cast<double>(x.size() - 1);
}

/// Regularized incomplete beta function I_x(a, b), continued fraction
/// evaluated to 1e-14 relative convergence.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double dof);
/// Upper tail 1 - cdf, computed without cancellation.
double student_t_sf(double t, double dof);

double f_cdf(double f, double dof1, double dof2);
double f_sf(double f, double dof1, double dof2);

/// One-sided Welch test of H1: mean(a) > mean(b).
///
/// When both samples have exactly zero variance the statistic is undefined;
/// the p-value is then 0.5 for equal means, 0 when mean(a) > mean(b) and 1
/// otherwise, and `zero_variance_pair` is set.
TestResult welch_one_sided(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// p-value of the F test of a reduced model nested in a full one. Degrees of
/// freedom are residual degrees of freedom; df_reduced > df_full > 0.
double f_test_nested(double rss_full, double df_full, double rss_reduced, double df_reduced);

}  // namespace das::stats
