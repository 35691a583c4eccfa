#include "das/edges.hpp"

#include "das/additive.hpp"
#include "das/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace das {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void DiscoveryParams::validate() const {
  if (k < 1) throw ValidationError("K must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(prune_cutoff > 0.0 && prune_cutoff < 1.0)) throw ValidationError("prune cutoff must lie in (0, 1)");
  if (!(degeneracy_threshold >= 0.0)) throw ValidationError("degeneracy threshold must be >= 0");
  stein.validate();
}

CandidateGraph das_select(const Dataset& data, const OrderingResult& order, const DiscoveryParams& params) {
  params.validate();
  const Index d = data.d();
  if (order.ordering.size() != d || static_cast<Index>(order.removal.size()) != d)
    throw DimensionMismatch("ordering covers " + std::to_string(order.ordering.size()) + " nodes, data has " +
                            std::to_string(d));

  CandidateGraph cand;
  cand.adjacency = Adjacency::Constant(d, d, false);
  cand.pvalues = Eigen::MatrixXd::Constant(d, d, kNaN);
  cand.mean_abs = Eigen::MatrixXd::Constant(d, d, kNaN);
  cand.reference.assign(static_cast<std::size_t>(d), -1);

  std::vector<Index> active(static_cast<std::size_t>(d));
  std::iota(active.begin(), active.end(), Index{0});

  for (const Index leaf : order.removal) {
    if (active.size() == 1) break;
    const auto leaf_pos = static_cast<Index>(std::find(active.begin(), active.end(), leaf) - active.begin());

    const ScoreJacobianRows rows = stein_hessian_row(data.values, leaf, active, params.stein);
    const Eigen::MatrixXd abs_j = rows.entries.cwiseAbs();

    // Predecessors, as positions into `active`.
    std::vector<Index> preds;
    for (Index k = 0; k < static_cast<Index>(active.size()); ++k) {
      if (k == leaf_pos) continue;
      preds.push_back(k);
      cand.mean_abs(leaf, active[static_cast<std::size_t>(k)]) = abs_j.col(k).mean();
    }

    if (preds.size() == 1) {
      cand.adjacency(active[static_cast<std::size_t>(preds.front())], leaf) = true;
      ++cand.untested_admissions;
    } else {
      auto by_mean_desc = [&](Index a, Index b) {
        const double ma = cand.mean_abs(leaf, active[static_cast<std::size_t>(a)]);
        const double mb = cand.mean_abs(leaf, active[static_cast<std::size_t>(b)]);
        return ma != mb ? ma > mb : a < b;
      };
      std::stable_sort(preds.begin(), preds.end(), by_mean_desc);
      const auto keep = static_cast<std::size_t>(std::min<Index>(params.k + 1, static_cast<Index>(preds.size())));
      preds.resize(keep);

      const Index ref = preds.back();
      cand.reference[static_cast<std::size_t>(leaf)] = active[static_cast<std::size_t>(ref)];
      for (std::size_t t = 0; t + 1 < preds.size(); ++t) {
        const Index k = preds[t];
        const auto result = stats::welch_one_sided(abs_j.col(k), abs_j.col(ref));
        const Index node = active[static_cast<std::size_t>(k)];
        cand.pvalues(node, leaf) = result.p_value;
        ++cand.tests;
        if (result.zero_variance_pair) ++cand.zero_variance_tests;
        if (result.p_value < params.alpha) cand.adjacency(node, leaf) = true;
      }
    }
    active.erase(active.begin() + leaf_pos);
  }
  return cand;
}

PruneResult cam_prune(const Dataset& data, const Adjacency& candidates, const DiscoveryParams& params) {
  params.validate();
  const Index d = data.d();
  const Index n = data.n();
  if (candidates.rows() != d || candidates.cols() != d)
    throw DimensionMismatch("candidate adjacency does not match the data");
  Dag cand_dag(candidates);  // rejects cyclic candidate sets

  PruneResult out;
  out.pvalues = Eigen::MatrixXd::Constant(d, d, kNaN);
  Adjacency kept = Adjacency::Constant(d, d, false);

  for (Index child = 0; child < d; ++child) {
    const std::vector<Index> parents = cand_dag.parents(child);
    if (parents.empty()) continue;

    std::vector<Eigen::MatrixXd> blocks;
    Index width = 1;
    for (Index p : parents) {
      blocks.push_back(additive::covariate_block(data.values.col(p)));
      width += blocks.back().cols();
    }
    if (width >= n) {
      out.warnings.push_back("node " + std::to_string(child) + ": too few samples to test " +
                             std::to_string(parents.size()) + " candidate parents; all kept");
      for (Index p : parents) kept(p, child) = true;
      continue;
    }

    Eigen::MatrixXd design(n, width);
    design.col(0).setOnes();
    std::vector<std::vector<Index>> group_cols;
    Index col = 1;
    for (const auto& block : blocks) {
      design.middleCols(col, block.cols()) = block;
      std::vector<Index> cols(static_cast<std::size_t>(block.cols()));
      std::iota(cols.begin(), cols.end(), col);
      group_cols.push_back(std::move(cols));
      col += block.cols();
    }

    const additive::NormalEquations eq(std::move(design), data.values.col(child));
    std::vector<Index> all_cols(static_cast<std::size_t>(width));
    std::iota(all_cols.begin(), all_cols.end(), Index{0});
    const auto full = eq.fit(all_cols);
    bool stabilized = full.stabilized;

    for (std::size_t g = 0; g < parents.size(); ++g) {
      std::vector<Index> reduced_cols;
      for (Index c : all_cols)
        if (!std::binary_search(group_cols[g].begin(), group_cols[g].end(), c)) reduced_cols.push_back(c);
      const auto reduced = eq.fit(reduced_cols);
      stabilized = stabilized || reduced.stabilized;
      const double p = stats::f_test_nested(full.rss, full.dof, std::max(reduced.rss, full.rss), reduced.dof);
      out.pvalues(parents[g], child) = p;
      if (p <= params.prune_cutoff) kept(parents[g], child) = true;
    }
    if (stabilized)
      out.warnings.push_back("node " + std::to_string(child) + ": singular additive design, ridge-stabilized fit used");
  }
  out.dag = Dag(std::move(kept));
  return out;
}

DiscoveryReport discover(const Dataset& input, const DiscoveryParams& params, const std::optional<Dag>& truth) {
  DiscoveryReport report;
  std::string stage = "validation";
  try {
    params.validate();
    if (truth && truth->size() != input.d())
      throw DimensionMismatch("truth has " + std::to_string(truth->size()) + " nodes, data has " +
                              std::to_string(input.d()) + " columns");
    const Dataset data = params.standardize ? standardize(input) : input;

    stage = "ordering";
    auto start = std::chrono::steady_clock::now();
    report.ordering = score_order(data, params.stein);
    report.timings.ordering = seconds_since(start);
    report.degeneracy_flag = linear_degeneracy_diagnostic(*report.ordering, params.degeneracy_threshold);
    if (report.degeneracy_flag)
      report.warnings.push_back("leaf variances are not separated (ratio " +
                                std::to_string(report.ordering->degeneracy_ratio) +
                                "); the data may come from a linear, unidentifiable model");

    stage = "selection";
    start = std::chrono::steady_clock::now();
    report.candidates = das_select(data, *report.ordering, params);
    report.timings.selection = seconds_since(start);
    if (report.candidates->zero_variance_tests > 0)
      report.warnings.push_back(std::to_string(report.candidates->zero_variance_tests) +
                                " selection tests compared two constant samples (p set by convention)");

    stage = "pruning";
    if (params.skip_pruning) {
      report.final_dag = Dag(report.candidates->adjacency);
    } else {
      start = std::chrono::steady_clock::now();
      report.pruned = cam_prune(data, report.candidates->adjacency, params);
      report.timings.pruning = seconds_since(start);
      report.final_dag = report.pruned->dag;
      for (const auto& w : report.pruned->warnings) report.warnings.push_back(w);
    }

    stage = "evaluation";
    if (truth) report.metrics = evaluate(*truth, *report.final_dag, truth->size() <= kSidMaxNodes);
  } catch (const Error& e) {
    report.failure = DiscoveryReport::Failure{stage, e.kind(), e.what()};
  }
  return report;
}

}  // namespace das
