#include "das/stats.hpp"

#include "das/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace das::stats {

namespace {

constexpr double kEps = 1e-14;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalFailure("incomplete beta continued fraction did not converge (a=" + std::to_string(a) +
                         ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass a y computed
// without cancellation.
double incomplete_beta_xy(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

void check_dof(double dof) {
  if (!(dof > 0.0) || std::isnan(dof)) throw ValidationError("invalid degrees of freedom " + std::to_string(dof));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0 || std::isnan(x)) throw ValidationError("incomplete beta argument outside [0, 1]");
  return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double student_t_sf(double t, double dof) {
  check_dof(dof);
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double t2 = t * t;
  // P(|T| > |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  const double two_tail = incomplete_beta_xy(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
  return t > 0 ? 0.5 * two_tail : 1.0 - 0.5 * two_tail;
}

double student_t_cdf(double t, double dof) {
  check_dof(dof);
  if (std::isnan(t)) throw ValidationError("t statistic is NaN");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double t2 = t * t;
  const double two_tail = incomplete_beta_xy(0.5 * dof, 0.5, dof / (dof + t2), t2 / (dof + t2));
  return t > 0 ? 1.0 - 0.5 * two_tail : 0.5 * two_tail;
}

double f_cdf(double f, double dof1, double dof2) {
  check_dof(dof1);
  check_dof(dof2);
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  const double num = dof1 * f;
  return incomplete_beta_xy(0.5 * dof1, 0.5 * dof2, num / (num + dof2), dof2 / (num + dof2));
}

double f_sf(double f, double dof1, double dof2) {
  check_dof(dof1);
  check_dof(dof2);
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double num = dof1 * f;
  return incomplete_beta_xy(0.5 * dof2, 0.5 * dof1, dof2 / (num + dof2), num / (num + dof2));
}

TestResult welch_one_sided(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  if (a.size() < 2 || b.size() < 2)
    throw InsufficientSamples("Welch test needs at least 2 values per sample");

  const double ma = mean(a);
  const double mb = mean(b);
  const double va = variance(a);
  const double vb = variance(b);
  if (!std::isfinite(va) || !std::isfinite(vb)) throw ValidationError("Welch test sample has non-finite variance");

  TestResult r;
  r.alternative = Alternative::Greater;
  if (va == 0.0 && vb == 0.0) {
    r.zero_variance_pair = true;
    r.dof = na + nb - 2.0;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 0.5;
    } else {
      r.statistic = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = ma > mb ? 0.0 : 1.0;
    }
    return r;
  }

  const double sa = va / na;
  const double sb = vb / nb;
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_sf(r.statistic, r.dof);
  return r;
}

double f_test_nested(double rss_full, double df_full, double rss_reduced, double df_reduced) {
  if (!(df_full > 0.0) || !(df_reduced > df_full))
    throw ValidationError("invalid degrees of freedom: need df_reduced > df_full > 0, got " +
                          std::to_string(df_reduced) + " and " + std::to_string(df_full));
  if (!(rss_full >= -1e-12) || !std::isfinite(rss_full) || !std::isfinite(rss_reduced))
    throw ValidationError("residual sums of squares must be finite and non-negative");
  const double slack = 1e-12 + 1e-9 * std::fabs(rss_full);
  if (rss_reduced < rss_full - slack)
    throw ValidationError("reduced model fits better than the full model");

  const double numerator = std::max(0.0, rss_reduced - rss_full) / (df_reduced - df_full);
  if (numerator == 0.0) return 1.0;
  const double denominator = std::max(0.0, rss_full) / df_full;
  if (denominator == 0.0) return 0.0;
  return f_sf(numerator / denominator, df_reduced - df_full, df_full);
}

}  // namespace das::stats
