#include "das/graph.hpp"

#include "das/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <queue>
#include <string>

namespace das {

namespace {

void check_square(const Adjacency& a) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("adjacency is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void check_same_size(const Dag& a, const Dag& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("graphs have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                            " nodes");
}

// Bayes-ball reachability: is `target` d-connected to `source` given `given`?
// `given` must not contain `source`.
bool d_connected(const Adjacency& adj, Index source, Index target, const std::vector<bool>& given) {
  const Index d = adj.rows();

  // Nodes in `given` or with a descendant in `given`.
  std::vector<bool> opens_collider(static_cast<std::size_t>(d), false);
  std::vector<Index> stack;
  for (Index v = 0; v < d; ++v)
    if (given[static_cast<std::size_t>(v)]) stack.push_back(v);
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    if (opens_collider[static_cast<std::size_t>(v)]) continue;
    opens_collider[static_cast<std::size_t>(v)] = true;
    for (Index p = 0; p < d; ++p)
      if (adj(p, v) && !opens_collider[static_cast<std::size_t>(p)]) stack.push_back(p);
  }

  // State: (node, arrived_from_child). Arriving "up" means the previous edge
  // points into the previous node.
  std::vector<bool> seen_up(static_cast<std::size_t>(d), false), seen_down(static_cast<std::size_t>(d), false);
  std::deque<std::pair<Index, bool>> queue{{source, true}};
  while (!queue.empty()) {
    const auto [v, up] = queue.front();
    queue.pop_front();
    auto& seen = up ? seen_up : seen_down;
    if (seen[static_cast<std::size_t>(v)]) continue;
    seen[static_cast<std::size_t>(v)] = true;

    const bool observed = given[static_cast<std::size_t>(v)];
    if (!observed && v == target) return true;
    if (up) {
      if (observed) continue;
      for (Index u = 0; u < d; ++u) {
        if (adj(u, v)) queue.emplace_back(u, true);
        if (adj(v, u)) queue.emplace_back(u, false);
      }
    } else {
      if (!observed)
        for (Index u = 0; u < d; ++u)
          if (adj(v, u)) queue.emplace_back(u, false);
      if (opens_collider[static_cast<std::size_t>(v)])
        for (Index u = 0; u < d; ++u)
          if (adj(u, v)) queue.emplace_back(u, true);
    }
  }
  return false;
}

std::vector<bool> reachable_from(const Adjacency& adj, Index node) {
  const Index d = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  std::vector<Index> stack{node};
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index u = 0; u < d; ++u) {
      if (adj(v, u) && !seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        stack.push_back(u);
      }
    }
  }
  return seen;
}

}  // namespace

Dag::Dag(Index d) : adjacency_(Adjacency::Constant(d, d, false)) {
  if (d < 0) throw ValidationError("negative node count");
}

Dag::Dag(Adjacency adjacency) : adjacency_(std::move(adjacency)) {
  check_square(adjacency_);
  for (Index i = 0; i < size(); ++i)
    if (adjacency_(i, i)) throw CycleDetected("self-loop on node " + std::to_string(i));
  (void)topological_sort(adjacency_);
}

Dag Dag::from_edges(Index d, const std::vector<Edge>& edges) {
  Adjacency a = Adjacency::Constant(d, d, false);
  for (const auto& [from, to] : edges) {
    if (from < 0 || to < 0 || from >= d || to >= d)
      throw ValidationError("edge " + std::to_string(from) + " -> " + std::to_string(to) + " outside 0.." +
                            std::to_string(d - 1));
    a(from, to) = true;
  }
  return Dag(std::move(a));
}

std::vector<Index> Dag::parents(Index node) const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i)
    if (adjacency_(i, node)) out.push_back(i);
  return out;
}

std::vector<Index> Dag::children(Index node) const {
  std::vector<Index> out;
  for (Index j = 0; j < size(); ++j)
    if (adjacency_(node, j)) out.push_back(j);
  return out;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (Index i = 0; i < size(); ++i)
    for (Index j = 0; j < size(); ++j)
      if (adjacency_(i, j)) out.emplace_back(i, j);
  return out;
}

std::vector<bool> Dag::descendants(Index node) const { return reachable_from(adjacency_, node); }

bool Dag::is_subgraph_of(const Dag& other) const {
  check_same_size(*this, other);
  return (adjacency_.array() && !other.adjacency_.array()).count() == 0;
}

Ordering::Ordering(std::vector<Index> nodes) : nodes_(std::move(nodes)), position_(nodes_.size(), -1) {
  const auto d = static_cast<Index>(nodes_.size());
  for (std::size_t p = 0; p < nodes_.size(); ++p) {
    const Index v = nodes_[p];
    if (v < 0 || v >= d || position_[static_cast<std::size_t>(v)] != -1)
      throw ValidationError("ordering is not a permutation of 0.." + std::to_string(d - 1));
    position_[static_cast<std::size_t>(v)] = static_cast<Index>(p);
  }
}

Ordering Ordering::identity(Index d) {
  std::vector<Index> nodes(static_cast<std::size_t>(d));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  return Ordering(std::move(nodes));
}

Ordering Ordering::reversed() const { return Ordering(std::vector<Index>(nodes_.rbegin(), nodes_.rend())); }

Dag sample_er(Index d, Index expected_edges, Rng& rng) {
  if (d < 1) throw ValidationError("sample_er: d must be >= 1");
  if (expected_edges < 0) throw ValidationError("sample_er: expected_edges must be >= 0");

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  const double pairs = 0.5 * static_cast<double>(d) * static_cast<double>(d - 1);
  const double p = pairs > 0 ? std::clamp(static_cast<double>(expected_edges) / pairs, 0.0, 1.0) : 0.0;
  std::bernoulli_distribution coin(p);

  Adjacency a = Adjacency::Constant(d, d, false);
  for (Index u = 0; u < d; ++u)
    for (Index v = u + 1; v < d; ++v)
      if (coin(rng)) a(order[static_cast<std::size_t>(u)], order[static_cast<std::size_t>(v)]) = true;
  return Dag(std::move(a));
}

Dag sample_sf(Index d, Index edges_per_node, Rng& rng) {
  if (d < 1) throw ValidationError("sample_sf: d must be >= 1");
  if (edges_per_node < 1 || (d > 1 && edges_per_node >= d))
    throw ValidationError("sample_sf: edges_per_node must satisfy 1 <= m < d");

  Adjacency a = Adjacency::Constant(d, d, false);
  std::vector<double> degree(static_cast<std::size_t>(d), 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index node = 1; node < d; ++node) {
    std::vector<Index> pool(static_cast<std::size_t>(node));
    std::iota(pool.begin(), pool.end(), Index{0});
    const Index draws = std::min(edges_per_node, node);
    for (Index k = 0; k < draws; ++k) {
      double total = 0.0;
      for (Index v : pool) total += degree[static_cast<std::size_t>(v)] + 1.0;
      double target = unit(rng) * total;
      std::size_t pick = pool.size() - 1;
      for (std::size_t t = 0; t < pool.size(); ++t) {
        target -= degree[static_cast<std::size_t>(pool[t])] + 1.0;
        if (target < 0.0) {
          pick = t;
          break;
        }
      }
      const Index parent = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      a(parent, node) = true;
      degree[static_cast<std::size_t>(parent)] += 1.0;
      degree[static_cast<std::size_t>(node)] += 1.0;
    }
  }
  return Dag(std::move(a));
}

Ordering topological_sort(const Adjacency& adjacency) {
  check_square(adjacency);
  const Index d = adjacency.rows();
  std::vector<Index> indegree(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) indegree[static_cast<std::size_t>(j)] = adjacency.col(j).count();

  std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
  for (Index j = 0; j < d; ++j)
    if (indegree[static_cast<std::size_t>(j)] == 0) ready.push(j);

  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(d));
  while (!ready.empty()) {
    const Index v = ready.top();
    ready.pop();
    out.push_back(v);
    for (Index u = 0; u < d; ++u)
      if (adjacency(v, u) && --indegree[static_cast<std::size_t>(u)] == 0) ready.push(u);
  }
  if (static_cast<Index>(out.size()) != d)
    throw CycleDetected(std::to_string(d - static_cast<Index>(out.size())) + " nodes lie on or behind a cycle");
  return Ordering(std::move(out));
}

Dag full_dag_from_order(const Ordering& order) {
  const Index d = order.size();
  Adjacency a = Adjacency::Constant(d, d, false);
  for (Index p = 0; p < d; ++p)
    for (Index q = p + 1; q < d; ++q) a(order[p], order[q]) = true;
  return Dag(std::move(a));
}

Index order_violations(const Dag& g, const Ordering& order) {
  if (g.size() != order.size()) throw DimensionMismatch("graph and ordering sizes differ");
  Index count = 0;
  for (const auto& [from, to] : g.edges())
    if (!order.precedes(from, to)) ++count;
  return count;
}

Index shd(const Dag& truth, const Dag& est) {
  check_same_size(truth, est);
  const auto diff = (truth.adjacency().array() != est.adjacency().array()).eval();
  const Adjacency pair_diff = diff || diff.transpose();
  return pair_diff.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().count();
}

Index sid(const Dag& truth, const Dag& est) {
  check_same_size(truth, est);
  const Index d = truth.size();
  const Adjacency& g = truth.adjacency();

  std::vector<std::vector<bool>> desc(static_cast<std::size_t>(d));
  for (Index v = 0; v < d; ++v) desc[static_cast<std::size_t>(v)] = truth.descendants(v);
  auto is_desc = [&](Index of, Index v) { return desc[static_cast<std::size_t>(of)][static_cast<std::size_t>(v)]; };

  Index count = 0;
  for (Index i = 0; i < d; ++i) {
    std::vector<bool> adjust(static_cast<std::size_t>(d), false);
    for (Index p : est.parents(i)) adjust[static_cast<std::size_t>(p)] = true;

    for (Index j = 0; j < d; ++j) {
      if (j == i) continue;
      if (adjust[static_cast<std::size_t>(j)]) {
        // The estimate claims no effect of i on j.
        if (is_desc(i, j)) ++count;
        continue;
      }

      // Nodes other than i on directed paths i -> ... -> j.
      std::vector<bool> on_causal(static_cast<std::size_t>(d), false);
      for (Index w = 0; w < d; ++w)
        on_causal[static_cast<std::size_t>(w)] = is_desc(i, w) && (w == j || is_desc(w, j));

      bool forbidden = false;
      for (Index z = 0; z < d && !forbidden; ++z) {
        if (!adjust[static_cast<std::size_t>(z)]) continue;
        for (Index w = 0; w < d; ++w) {
          if (on_causal[static_cast<std::size_t>(w)] && (w == z || is_desc(w, z))) {
            forbidden = true;
            break;
          }
        }
      }
      if (forbidden) {
        ++count;
        continue;
      }

      // Proper back-door graph: drop the first edge of every causal path.
      Adjacency backdoor = g;
      for (Index w = 0; w < d; ++w)
        if (on_causal[static_cast<std::size_t>(w)]) backdoor(i, w) = false;
      if (d_connected(backdoor, i, j, adjust)) ++count;
    }
  }
  return count;
}

std::pair<double, double> precision_recall(const Dag& truth, const Dag& est) {
  check_same_size(truth, est);
  const Index tp = (truth.adjacency().array() && est.adjacency().array()).count();
  const Index predicted = est.edge_count();
  const Index actual = truth.edge_count();
  const double precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
  const double recall = actual == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(actual);
  return {precision, recall};
}

GraphMetrics evaluate(const Dag& truth, const Dag& est, bool with_sid) {
  check_same_size(truth, est);
  const auto t = truth.adjacency().array();
  const auto e = est.adjacency().array();
  const auto tt = truth.adjacency().transpose().array();

  GraphMetrics m;
  m.true_positives = (t && e).count();
  m.reversed = (e && tt && !t).count();
  m.false_positives = (e && !t && !tt).count();
  m.false_negatives = (t && !e && !est.adjacency().transpose().array()).count();
  m.shd = shd(truth, est);
  std::tie(m.precision, m.recall) = precision_recall(truth, est);
  if (with_sid) m.sid = sid(truth, est);
  return m;
}

}  // namespace das
