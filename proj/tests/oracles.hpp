#pragma once

// Brute-force reference computations used only by tests. They follow the
// textbook definitions directly and share no code with the library.

#include "das/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using das::Adjacency;
using das::Index;

struct EdgeCounts {
  Index tp = 0, fp = 0, fn = 0, reversed = 0;
  double precision = 1.0, recall = 1.0;
  Index shd() const { return fp + fn + reversed; }
};

inline EdgeCounts count_edges(const Adjacency& t, const Adjacency& e) {
  EdgeCounts c;
  const Index d = t.rows();
  Index est_edges = 0, true_edges = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      if (i == j) continue;
      est_edges += e(i, j);
      true_edges += t(i, j);
      if (e(i, j) && t(i, j)) ++c.tp;
      if (e(i, j) && t(j, i)) ++c.reversed;
      if (e(i, j) && !t(i, j) && !t(j, i)) ++c.fp;
      if (t(i, j) && !e(i, j) && !e(j, i)) ++c.fn;
    }
  if (est_edges > 0) c.precision = double(c.tp) / double(est_edges);
  if (true_edges > 0) c.recall = double(c.tp) / double(true_edges);
  return c;
}

inline bool acyclic(const Adjacency& a) {
  const Index d = a.rows();
  std::vector<int> state(static_cast<std::size_t>(d), 0);
  std::function<bool(Index)> visit = [&](Index v) {
    state[v] = 1;
    for (Index w = 0; w < d; ++w)
      if (a(v, w)) {
        if (state[w] == 1) return false;
        if (state[w] == 0 && !visit(w)) return false;
      }
    state[v] = 2;
    return true;
  };
  for (Index v = 0; v < d; ++v)
    if (state[v] == 0 && !visit(v)) return false;
  return true;
}

/// Every labelled DAG on d nodes (d <= 4 keeps this at 543 graphs).
inline std::vector<Adjacency> all_dags(Index d) {
  std::vector<std::pair<Index, Index>> slots;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j) slots.emplace_back(i, j);
  std::vector<Adjacency> out;
  for (unsigned long mask = 0; mask < (1ul << slots.size()); ++mask) {
    Adjacency a = Adjacency::Constant(d, d, false);
    for (std::size_t s = 0; s < slots.size(); ++s)
      if (mask >> s & 1ul) a(slots[s].first, slots[s].second) = true;
    if (acyclic(a)) out.push_back(a);
  }
  return out;
}

inline Adjacency random_dag(Index d, double p, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution coin(p);
  Adjacency a = Adjacency::Constant(d, d, false);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j)
      if (coin(rng)) a(perm[i], perm[j]) = true;
  return a;
}

/// reach(v)[w]: w is reachable from v along a non-empty directed path.
inline std::vector<bool> reach(const Adjacency& a, Index v) {
  const Index d = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  std::vector<Index> stack{v};
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index w = 0; w < d; ++w)
      if (a(u, w) && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return seen;
}

/// All simple paths between s and t in the skeleton.
inline std::vector<std::vector<Index>> simple_paths(const Adjacency& a, Index s, Index t) {
  const Index d = a.rows();
  std::vector<std::vector<Index>> out;
  std::vector<Index> path{s};
  std::vector<bool> on(static_cast<std::size_t>(d), false);
  on[s] = true;
  std::function<void(Index)> extend = [&](Index u) {
    if (u == t) {
      out.push_back(path);
      return;
    }
    for (Index w = 0; w < d; ++w) {
      if (on[w] || !(a(u, w) || a(w, u))) continue;
      on[w] = true;
      path.push_back(w);
      extend(w);
      path.pop_back();
      on[w] = false;
    }
  };
  extend(s);
  return out;
}

inline bool directed_path(const Adjacency& a, const std::vector<Index>& p) {
  for (std::size_t k = 0; k + 1 < p.size(); ++k)
    if (!a(p[k], p[k + 1])) return false;
  return true;
}

inline bool blocked(const Adjacency& a, const std::vector<Index>& p, const std::vector<bool>& z) {
  for (std::size_t k = 1; k + 1 < p.size(); ++k) {
    const Index prev = p[k - 1], v = p[k], next = p[k + 1];
    if (a(prev, v) && a(next, v)) {
      bool open = z[v];
      const auto de = reach(a, v);
      for (std::size_t w = 0; w < z.size(); ++w) open = open || (z[w] && de[w]);
      if (!open) return true;
    } else if (z[v]) {
      return true;
    }
  }
  return false;
}

/// Adjustment criterion: Z contains no descendant of a node (other than x)
/// on a causal path x -> ... -> y, and blocks every non-causal path.
inline bool valid_adjustment(const Adjacency& a, Index x, Index y, const std::vector<bool>& z) {
  const auto paths = simple_paths(a, x, y);
  for (const auto& p : paths) {
    if (!directed_path(a, p)) continue;
    for (std::size_t k = 1; k < p.size(); ++k) {
      if (z[p[k]]) return false;
      const auto de = reach(a, p[k]);
      for (std::size_t w = 0; w < z.size(); ++w)
        if (z[w] && de[w]) return false;
    }
  }
  for (const auto& p : paths)
    if (!directed_path(a, p) && !blocked(a, p, z)) return false;
  return true;
}

/// Structural intervention distance by pair enumeration.
inline Index sid(const Adjacency& truth, const Adjacency& est) {
  const Index d = truth.rows();
  Index count = 0;
  for (Index i = 0; i < d; ++i) {
    std::vector<bool> z(static_cast<std::size_t>(d), false);
    for (Index k = 0; k < d; ++k) z[k] = est(k, i);
    const auto de = reach(truth, i);
    for (Index j = 0; j < d; ++j) {
      if (j == i) continue;
      if (z[j])
        count += de[j] ? 1 : 0;
      else
        count += valid_adjustment(truth, i, j, z) ? 0 : 1;
    }
  }
  return count;
}

// Numerical integration.

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps = 1e-13) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, 50);
}

inline double t_pdf(double t, double nu) {
  const double logc = std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0) - 0.5 * std::log(nu * std::numbers::pi);
  return std::exp(logc - (nu + 1.0) / 2.0 * std::log1p(t * t / nu));
}

/// Upper tail of Student's t by quadrature from the centre.
inline double t_sf(double t, double nu) {
  auto f = [nu](double u) { return t_pdf(u, nu); };
  return t >= 0.0 ? 0.5 - integrate(f, 0.0, t) : 0.5 + integrate(f, t, 0.0);
}

inline double f_pdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  const double logc = std::lgamma((d1 + d2) / 2.0) - std::lgamma(d1 / 2.0) - std::lgamma(d2 / 2.0) +
                      d1 / 2.0 * std::log(d1 / d2);
  return std::exp(logc + (d1 / 2.0 - 1.0) * std::log(x) - (d1 + d2) / 2.0 * std::log1p(d1 * x / d2));
}

/// Upper tail of the F distribution, integrating in u = sqrt(x) so the
/// density has no singularity at 0.
inline double f_sf(double x, double d1, double d2) {
  if (x <= 0.0) return 1.0;
  auto g = [d1, d2](double u) {
    u = std::max(u, 1e-150);
    return 2.0 * u * f_pdf(u * u, d1, d2);
  };
  return 1.0 - integrate(g, 0.0, std::sqrt(x));
}

}  // namespace oracle
