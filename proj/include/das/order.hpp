#pragma once

#include "das/graph.hpp"
#include "das/stein.hpp"
#include "das/synth.hpp"

#include <Eigen/Core>

#include <vector>

namespace das {

/// Result of leaf-by-leaf ordering.
struct OrderingResult {
  /// Source-first ordering (position 0 is a source).
  Ordering ordering;
  /// Nodes in the order they were removed; the first entry is the first leaf.
  std::vector<Index> removal;
  /// diag_variances[t][k]: variance of the Jacobian diagonal estimate of
  /// node active[t][k] at step t. There are d - 1 estimation steps; the last
  /// node needs none.
  std::vector<Eigen::VectorXd> diag_variances;
  std::vector<std::vector<Index>> active;
  /// max / min diagonal variance at the first step (1 when d == 1).
  double degeneracy_ratio = 1.0;

  /// Builds a result from a known ordering, without variance diagnostics.
  static OrderingResult from_ordering(const Ordering& order);
};

/// Repeatedly estimates the Jacobian diagonal on the active columns, removes
/// the node with the smallest sample variance (ties to the lower id) and
/// records it as the next leaf.
OrderingResult score_order(const Dataset& data, const SteinConfig& cfg);

inline constexpr double kDefaultDegeneracyThreshold = 5.0;

/// True when the first-step variance ratio is below `threshold`, i.e. no
/// node stands out as a leaf, as happens for linear Gaussian data.
bool linear_degeneracy_diagnostic(const OrderingResult& result, double threshold = kDefaultDegeneracyThreshold);

}  // namespace das
