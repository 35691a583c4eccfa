#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace das {

using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Boolean adjacency; entry (i, j) is true iff there is a directed edge i -> j.
using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Edge = std::pair<Index, Index>;

/// Directed acyclic graph over nodes 0..d-1.
///
/// Construction validates the adjacency (square, no self-loops, no directed
/// cycles), so every live Dag is acyclic. Values are immutable.
class Dag {
 public:
  Dag() = default;
  explicit Dag(Index d);
  explicit Dag(Adjacency adjacency);

  static Dag from_edges(Index d, const std::vector<Edge>& edges);

  Index size() const noexcept { return adjacency_.rows(); }
  const Adjacency& adjacency() const noexcept { return adjacency_; }
  bool has_edge(Index from, Index to) const { return adjacency_(from, to); }
  Index edge_count() const { return adjacency_.count(); }

  std::vector<Index> parents(Index node) const;
  std::vector<Index> children(Index node) const;
  /// Edges in row-major order (by source, then target).
  std::vector<Edge> edges() const;

  /// Nodes reachable from `node` along directed paths, excluding `node`.
  std::vector<bool> descendants(Index node) const;

  bool is_subgraph_of(const Dag& other) const;

  friend bool operator==(const Dag& a, const Dag& b) { return a.adjacency_ == b.adjacency_; }

 private:
  Adjacency adjacency_;
};

/// A permutation of node ids. Position 0 holds the source end: every edge of a
/// compatible DAG points from an earlier position to a later one.
class Ordering {
 public:
  Ordering() = default;
  explicit Ordering(std::vector<Index> nodes);

  static Ordering identity(Index d);

  Index size() const noexcept { return static_cast<Index>(nodes_.size()); }
  const std::vector<Index>& nodes() const noexcept { return nodes_; }
  Index operator[](Index position) const { return nodes_[static_cast<std::size_t>(position)]; }
  /// position(node) is the index of `node` inside the ordering.
  Index position(Index node) const { return position_[static_cast<std::size_t>(node)]; }
  bool precedes(Index a, Index b) const { return position(a) < position(b); }

  Ordering reversed() const;

  friend bool operator==(const Ordering& a, const Ordering& b) { return a.nodes_ == b.nodes_; }

 private:
  std::vector<Index> nodes_;
  std::vector<Index> position_;
};

struct GraphMetrics {
  Index shd = 0;
  std::optional<Index> sid;
  double precision = 1.0;
  double recall = 1.0;
  Index true_positives = 0;
  Index false_positives = 0;
  Index false_negatives = 0;
  Index reversed = 0;
};

// Generators.

/// Erdos-Renyi DAG: random node order, each forward pair kept with
/// probability expected_edges / C(d, 2) clamped to [0, 1].
Dag sample_er(Index d, Index expected_edges, Rng& rng);

/// Preferential-attachment DAG. Node i attaches to min(edges_per_node, i)
/// distinct earlier nodes drawn with probability proportional to degree + 1;
/// edges point from the older node to the newer one.
Dag sample_sf(Index d, Index edges_per_node, Rng& rng);

// Orders.

/// Kahn's algorithm with ascending-index tie-breaking. Throws CycleDetected.
Ordering topological_sort(const Adjacency& adjacency);
inline Ordering topological_sort(const Dag& g) { return topological_sort(g.adjacency()); }

Dag full_dag_from_order(const Ordering& order);

/// Number of edges (i, j) of `g` with j placed before i in `order`.
Index order_violations(const Dag& g, const Ordering& order);

// Metrics.

/// Structural Hamming distance: false positives + false negatives + reversed
/// edges, a reversed edge counting once.
Index shd(const Dag& truth, const Dag& est);

/// Structural intervention distance of `est` with respect to `truth`.
Index sid(const Dag& truth, const Dag& est);

std::pair<double, double> precision_recall(const Dag& truth, const Dag& est);

/// Edge counts and all metrics; SID is computed only when `with_sid` is set.
GraphMetrics evaluate(const Dag& truth, const Dag& est, bool with_sid);

}  // namespace das
