#pragma once

// Fixed test batteries shared by the unit tests and the acceptance runner.

#include "das/stats.hpp"
#include "das/stein.hpp"
#include "das/synth.hpp"

#include "oracles.hpp"

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

struct WelchCase {
  Eigen::VectorXd a, b;
};

struct FCase {
  double rss_full, df_full, rss_reduced, df_reduced;
};

inline std::vector<WelchCase> welch_battery() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(3, 40);
  std::uniform_real_distribution<double> shift(-1.0, 1.5), scale(0.1, 3.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<WelchCase> out;
  for (int c = 0; c < 25; ++c) {
    WelchCase w;
    w.a.resize(size(rng));
    w.b.resize(size(rng));
    const double sa = scale(rng), sb = scale(rng), m = shift(rng);
    for (auto& v : w.a) v = m + sa * normal(rng);
    for (auto& v : w.b) v = sb * normal(rng);
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<FCase> f_battery() {
  std::mt19937_64 rng(20240602);
  std::uniform_int_distribution<int> groups(1, 10), resid(5, 990);
  std::uniform_real_distribution<double> rss(0.5, 500.0), rel(0.0, 0.2);
  std::vector<FCase> out;
  for (int c = 0; c < 25; ++c) {
    FCase f;
    f.df_full = resid(rng);
    f.df_reduced = f.df_full + groups(rng);
    f.rss_full = rss(rng);
    f.rss_reduced = f.rss_full * (1.0 + rel(rng));
    out.push_back(f);
  }
  return out;
}

/// Welch p-value from first principles: statistic and Satterthwaite degrees
/// of freedom written out, tail probability by quadrature.
inline double welch_reference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  auto moments = [](const Eigen::VectorXd& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= double(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::make_pair(m, ss / double(x.size() - 1));
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double qa = va / double(a.size()), qb = vb / double(b.size());
  const double t = (ma - mb) / std::sqrt(qa + qb);
  const double nu = (qa + qb) * (qa + qb) / (qa * qa / double(a.size() - 1) + qb * qb / double(b.size() - 1));
  return oracle::t_sf(t, nu);
}

inline double f_reference(const FCase& c) {
  const double d1 = c.df_reduced - c.df_full;
  const double stat = ((c.rss_reduced - c.rss_full) / d1) / (c.rss_full / c.df_full);
  return oracle::f_sf(stat, d1, c.df_full);
}

/// Worst absolute deviation of the library p-values from the references over
/// all 50 cases.
inline double battery_max_error() {
  double worst = 0.0;
  for (const auto& w : welch_battery())
    worst = std::max(worst, std::abs(das::stats::welch_one_sided(w.a, w.b).p_value - welch_reference(w.a, w.b)));
  for (const auto& f : f_battery())
    worst = std::max(worst, std::abs(das::stats::f_test_nested(f.rss_full, f.df_full, f.rss_reduced, f.df_reduced) -
                                     f_reference(f)));
  return worst;
}

/// Kolmogorov-Smirnov distance of null Welch p-values from Uniform(0, 1).
inline double null_ks_statistic(int sims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(sims));
  Eigen::VectorXd a(30), b(30);
  for (int s = 0; s < sims; ++s) {
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng);
    p.push_back(das::stats::welch_one_sided(a, b).p_value);
  }
  std::sort(p.begin(), p.end());
  double ks = 0.0;
  const double m = double(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    ks = std::max({ks, double(i + 1) / m - p[i], p[i] - double(i) / m});
  return ks;
}

struct GaussianCheck {
  double relative_mse = 0.0;
  /// Worst per-dimension distance of the mean Jacobian-diagonal estimate
  /// from -1.
  double diag_deviation = 0.0;
};

/// Stein estimates on n draws of N(0, I_dim) against the exact score -x and
/// Jacobian -I.
inline GaussianCheck gaussian_stein_check(das::Index dim, das::Index n, std::uint64_t seed,
                                          const das::SteinConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, dim);
  for (auto& v : x.reshaped()) v = normal(rng);
  const Eigen::MatrixXd g = das::stein_gradient(x, cfg);
  const Eigen::MatrixXd h = das::stein_hessian_diag(x, cfg);
  GaussianCheck out;
  out.relative_mse = (g + x).squaredNorm() / x.squaredNorm();
  for (das::Index j = 0; j < dim; ++j) out.diag_deviation = std::max(out.diag_deviation, std::abs(h.col(j).mean() + 1.0));
  return out;
}

/// Area under the ROC curve of `scores` for the positive labels (ties count
/// one half).
inline double auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (!positive[i] || positive[j]) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  return pairs > 0.0 ? wins / pairs : 1.0;
}

/// Random nonlinear SCMs on 2 or 3 nodes; for each, mean |J(l, j)| of a sink
/// l against every other node, labelled by whether j is a parent of l.
inline double lemma_auc(int models, das::Index n, std::uint64_t seed) {
  std::vector<double> scores;
  std::vector<bool> labels;
  std::mt19937_64 rng(seed);
  for (int m = 0; m < models; ++m) {
    const das::Index d = 2 + m % 2;
    das::Dag g;
    do {
      g = das::Dag(oracle::random_dag(d, 0.6, rng));
    } while (g.edge_count() == 0);
    const das::ScmSpec scm = das::sample_scm(g, {}, rng);
    const das::Dataset data = das::draw(scm, n, rng);
    das::Index sink = -1;
    for (das::Index v = 0; v < d; ++v)
      if (g.children(v).empty() && !g.parents(v).empty()) sink = v;
    const auto row = das::stein_hessian_row(data.values, sink, das::SteinConfig{});
    for (das::Index k = 0; k < d; ++k) {
      const das::Index j = row.columns[static_cast<std::size_t>(k)];
      if (j == sink) continue;
      scores.push_back(row.entries.col(k).cwiseAbs().mean());
      labels.push_back(g.has_edge(j, sink));
    }
  }
  return auc(scores, labels);
}

}  // namespace fixtures
