#pragma once

#include "das/error.hpp"
#include "das/graph.hpp"
#include "das/order.hpp"
#include "das/stein.hpp"
#include "das/synth.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace das {

struct DiscoveryParams {
  /// Maximum number of tested candidate parents per node.
  Index k = 20;
  /// Welch test threshold; an edge is admitted when p < alpha.
  double alpha = 0.01;
  /// Pruning keeps an edge when its F-test p-value is <= prune_cutoff.
  double prune_cutoff = 0.001;
  SteinConfig stein;
  bool standardize = false;
  bool skip_pruning = false;
  double degeneracy_threshold = kDefaultDegeneracyThreshold;

  void validate() const;
};

struct CandidateGraph {
  Adjacency adjacency;
  /// Welch p-value of each tested pair (parent, child); NaN when untested.
  Eigen::MatrixXd pvalues;
  /// mean_abs(l, j): sample mean of |d s_l / d x_j| computed while l was the
  /// current leaf; NaN when j was not a predecessor of l.
  Eigen::MatrixXd mean_abs;
  /// Reference node used for each child; -1 when no test was run.
  std::vector<Index> reference;
  Index tests = 0;
  Index zero_variance_tests = 0;
  /// Single-predecessor nodes whose only candidate was admitted untested.
  Index untested_admissions = 0;

  Index edge_count() const { return adjacency.count(); }
};

struct PruneResult {
  Dag dag;
  /// F-test p-value per candidate (parent, child); NaN elsewhere.
  Eigen::MatrixXd pvalues;
  std::vector<std::string> warnings;
};

struct StageTimings {
  double ordering = 0.0;
  double selection = 0.0;
  double pruning = 0.0;
};

struct DiscoveryReport {
  std::optional<OrderingResult> ordering;
  std::optional<CandidateGraph> candidates;
  std::optional<PruneResult> pruned;
  std::optional<Dag> final_dag;
  std::optional<GraphMetrics> metrics;
  bool degeneracy_flag = false;
  StageTimings timings;
  std::vector<std::string> warnings;

  /// Set when a stage failed; earlier stages stay populated.
  struct Failure {
    std::string stage;
    ErrorKind kind;
    std::string message;
  };
  std::optional<Failure> failure;

  bool ok() const noexcept { return !failure.has_value(); }
};

/// Graphs larger than this skip the structural intervention distance.
inline constexpr Index kSidMaxNodes = 200;

/// Candidate-edge selection. Leaves are visited in removal order; for each,
/// the Jacobian row is estimated on the still-active columns, the min(K+1, m)
/// predecessors with the largest mean |J| are kept, the one with the smallest
/// mean serves as reference, and each other member becomes a candidate
/// parent when the one-sided Welch test rejects equality at p < alpha. A node
/// with a single predecessor has no reference; that predecessor is admitted
/// untested and left to pruning.
CandidateGraph das_select(const Dataset& data, const OrderingResult& order, const DiscoveryParams& params);

/// Additive-model pruning: regress each node on spline expansions of its
/// candidate parents and keep a parent when the nested F test dropping its
/// block gives p <= prune_cutoff.
PruneResult cam_prune(const Dataset& data, const Adjacency& candidates, const DiscoveryParams& params);

/// Ordering, selection and (unless skipped) pruning, with stage timings and
/// metrics against `truth` when given. Failures are reported in the result
/// rather than thrown.
DiscoveryReport discover(const Dataset& data, const DiscoveryParams& params, const std::optional<Dag>& truth = {});

}  // namespace das
