#include "das/error.hpp"
#include "das/stats.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace das;
using namespace das::stats;

TEST(Descriptive, MeanAndUnbiasedVariance) {
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 6;
  EXPECT_DOUBLE_EQ(mean(x), 3.0);
  EXPECT_DOUBLE_EQ(variance(x), 14.0 / 3.0);
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // I_x(1, 1) = x; I_x(a, 1) = x^a.
  EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(incomplete_beta(2.5, 1.0, 0.4), std::pow(0.4, 2.5), 1e-14);
  EXPECT_NEAR(incomplete_beta(3.0, 4.0, 0.35) + incomplete_beta(4.0, 3.0, 0.65), 1.0, 1e-14);
  EXPECT_THROW(incomplete_beta(0.0, 1.0, 0.5), ValidationError);
  EXPECT_THROW(incomplete_beta(1.0, 1.0, 1.5), ValidationError);
}

TEST(StudentT, ClosedForms) {
  EXPECT_DOUBLE_EQ(student_t_cdf(0.0, 7.0), 0.5);
  EXPECT_NEAR(student_t_cdf(1.0, 1.0), 0.75, 1e-12);
  // dof 2: cdf = 1/2 + t / (2 sqrt(t^2 + 2)).
  EXPECT_NEAR(student_t_cdf(1.3, 2.0), 0.5 + 1.3 / (2.0 * std::sqrt(1.3 * 1.3 + 2.0)), 1e-12);
  EXPECT_THROW(student_t_cdf(1.0, 0.0), ValidationError);
}

TEST(StudentT, MatchesQuadrature) {
  EXPECT_NEAR(student_t_cdf(2.0, 10.0), 1.0 - oracle::t_sf(2.0, 10.0), 1e-10);
  for (double nu : {0.7, 1.0, 3.5, 12.0, 80.0, 900.0})
    for (double t : {-6.0, -2.2, -0.4, 0.0, 0.9, 1.96, 4.5}) {
      EXPECT_NEAR(student_t_sf(t, nu), oracle::t_sf(t, nu), 1e-10) << "t=" << t << " nu=" << nu;
      EXPECT_NEAR(student_t_cdf(t, nu) + student_t_cdf(-t, nu), 1.0, 1e-12);
    }
}

TEST(StudentT, FarTailWithoutCancellation) {
  const double p = student_t_sf(40.0, 900.0);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1e-150);
}

TEST(FDistribution, MatchesQuadrature) {
  for (double d1 : {1.0, 2.0, 7.0, 14.0})
    for (double d2 : {3.0, 40.0, 985.0})
      for (double x : {0.05, 0.8, 1.5, 4.0, 11.0})
        EXPECT_NEAR(f_sf(x, d1, d2), oracle::f_sf(x, d1, d2), 1e-10) << d1 << ' ' << d2 << ' ' << x;
  EXPECT_DOUBLE_EQ(f_cdf(0.0, 3.0, 5.0), 0.0);
}

TEST(Welch, IdenticalSamplesGiveHalf) {
  Eigen::VectorXd a(5);
  a << 1.0, 2.5, -0.3, 4.0, 2.0;
  const auto r = welch_one_sided(a, a);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.5);
  EXPECT_FALSE(r.zero_variance_pair);
}

TEST(Welch, SeparatedMeans) {
  Eigen::VectorXd a(4), b(4);
  a << 100.0, 100.001, 99.999, 100.0;
  b << 0.0, 0.001, -0.001, 0.0;
  EXPECT_LT(welch_one_sided(a, b).p_value, 1e-12);
  EXPECT_GT(welch_one_sided(b, a).p_value, 1.0 - 1e-12);
}

TEST(Welch, ComplementaryDirections) {
  for (const auto& w : fixtures::welch_battery())
    EXPECT_NEAR(welch_one_sided(w.a, w.b).p_value + welch_one_sided(w.b, w.a).p_value, 1.0, 1e-10);
}

TEST(Welch, ZeroVarianceConvention) {
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(5, 1.0);
  const Eigen::VectorXd two = Eigen::VectorXd::Constant(5, 2.0);
  auto r = welch_one_sided(one, one);
  EXPECT_TRUE(r.zero_variance_pair);
  EXPECT_DOUBLE_EQ(r.p_value, 0.5);
  r = welch_one_sided(two, one);
  EXPECT_TRUE(r.zero_variance_pair);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0);
  EXPECT_DOUBLE_EQ(welch_one_sided(one, two).p_value, 1.0);
}

TEST(Welch, RejectsTinySamples) {
  EXPECT_THROW(welch_one_sided(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(3)), InsufficientSamples);
  Eigen::VectorXd bad(3);
  bad << 1.0, std::numeric_limits<double>::infinity(), 0.0;
  EXPECT_THROW(welch_one_sided(bad, Eigen::VectorXd::Ones(3)), ValidationError);
}

TEST(Welch, StatisticAndDofMatchFormula) {
  Eigen::VectorXd a(10), b(10);
  a << 0.8, 1.9, 2.4, 1.1, 0.3, 2.2, 1.7, 1.5, 0.9, 2.0;
  b << 0.2, 0.6, -0.4, 1.0, 0.1, 0.5, 0.9, -0.2, 0.3, 0.7;
  const auto r = welch_one_sided(a, b);
  const double va = variance(a) / 10.0, vb = variance(b) / 10.0;
  EXPECT_NEAR(r.statistic, (mean(a) - mean(b)) / std::sqrt(va + vb), 1e-12);
  EXPECT_NEAR(r.dof, (va + vb) * (va + vb) / (va * va / 9.0 + vb * vb / 9.0), 1e-10);
  EXPECT_NEAR(r.p_value, fixtures::welch_reference(a, b), 1e-8);
}

TEST(Battery, AllFiftyCasesWithinTolerance) { EXPECT_LT(fixtures::battery_max_error(), 1e-8); }

TEST(Battery, NullPValuesAreUniform) { EXPECT_LT(fixtures::null_ks_statistic(10000, 99), 0.02); }

TEST(FTest, Limits) {
  EXPECT_DOUBLE_EQ(f_test_nested(10.0, 900.0, 10.0, 907.0), 1.0);
  EXPECT_LT(f_test_nested(10.0, 900.0, 20.0, 907.0), 1e-12);
}

TEST(FTest, ClampsRoundingNoise) {
  EXPECT_DOUBLE_EQ(f_test_nested(10.0, 900.0, 10.0 * (1.0 - 1e-13), 907.0), 1.0);
  EXPECT_THROW(f_test_nested(10.0, 900.0, 9.0, 907.0), ValidationError);
}

TEST(FTest, RejectsBadDegreesOfFreedom) {
  EXPECT_THROW(f_test_nested(1.0, 10.0, 2.0, 10.0), ValidationError);
  EXPECT_THROW(f_test_nested(1.0, 0.0, 2.0, 3.0), ValidationError);
}
