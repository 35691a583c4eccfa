#include "das/edges.hpp"
#include "das/error.hpp"
#include "das/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace das;

namespace {

struct Problem {
  ScmSpec scm;
  Dataset data;
};

Problem make(const Dag& g, Index n, std::uint64_t seed) {
  Rng rng(seed);
  ScmSpec scm = sample_scm(g, {}, rng);
  Dataset data = draw(scm, n, rng);
  return {std::move(scm), std::move(data)};
}

Problem er1(Index d, Index n, std::uint64_t seed) {
  Rng rng(seed);
  const Dag g = sample_er(d, d, rng);
  ScmSpec scm = sample_scm(g, {}, rng);
  Dataset data = draw(scm, n, rng);
  return {std::move(scm), std::move(data)};
}

OrderingResult true_order(const Dag& g) { return OrderingResult::from_ordering(topological_sort(g)); }

bool subset(const Adjacency& a, const Adjacency& b) { return (a.array() && !b.array()).count() == 0; }

}  // namespace

TEST(DiscoveryParams, Validation) {
  DiscoveryParams p;
  EXPECT_NO_THROW(p.validate());
  p.k = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.alpha = 1.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.prune_cutoff = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.stein.eta = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(DasSelect, ThreeNodeExampleWithTrueOrder) {
  // X3 -> X2 -> X1 with ids 2 -> 1 -> 0.
  const Dag g = Dag::from_edges(3, {{2, 1}, {1, 0}});
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Problem p = make(g, 1000, s);
    const CandidateGraph c = das_select(p.data, true_order(g), DiscoveryParams{});
    hits += c.adjacency(2, 1) && c.adjacency(1, 0) && !c.adjacency(2, 0);
  }
  EXPECT_GE(hits, 9);
}

TEST(DasSelect, SingleNodeHasNoTests) {
  const Dataset data(Eigen::MatrixXd::Random(50, 1));
  const CandidateGraph c = das_select(data, OrderingResult::from_ordering(Ordering({0})), DiscoveryParams{});
  EXPECT_EQ(c.edge_count(), 0);
  EXPECT_EQ(c.tests, 0);
  EXPECT_EQ(c.reference, (std::vector<Index>{-1}));
}

TEST(DasSelect, SinglePredecessorAdmittedUntested) {
  const Problem p = make(Dag::from_edges(2, {{0, 1}}), 300, 1);
  const CandidateGraph c = das_select(p.data, OrderingResult::from_ordering(Ordering({0, 1})), DiscoveryParams{});
  EXPECT_TRUE(c.adjacency(0, 1));
  EXPECT_EQ(c.tests, 0);
  EXPECT_EQ(c.untested_admissions, 1);
  EXPECT_TRUE(std::isnan(c.pvalues(0, 1)));
  EXPECT_FALSE(std::isnan(c.mean_abs(1, 0)));
}

TEST(DasSelect, RejectsMismatchedOrdering) {
  const Dataset data(Eigen::MatrixXd::Random(50, 3));
  EXPECT_THROW(das_select(data, OrderingResult::from_ordering(Ordering({0, 1})), DiscoveryParams{}),
               DimensionMismatch);
}

TEST(DasSelect, BookkeepingWithSmallK) {
  const Problem p = er1(8, 400, 3);
  const OrderingResult order = OrderingResult::from_ordering(Ordering::identity(8));
  DiscoveryParams params;
  params.k = 2;
  const CandidateGraph c = das_select(p.data, order, params);
  Index expected_tests = 0;
  for (Index child = 0; child < 8; ++child) {
    const Index m = child;
    EXPECT_LE(c.adjacency.col(child).count(), params.k);
    if (m >= 2) expected_tests += std::min<Index>(params.k + 1, m) - 1;
    for (Index parent = 0; parent < 8; ++parent) {
      if (c.adjacency(parent, child)) EXPECT_LT(parent, child);
      // The reference is never admitted in its own round.
      if (m >= 2) EXPECT_FALSE(c.adjacency(c.reference[std::size_t(child)], child));
      if (parent < child)
        EXPECT_FALSE(std::isnan(c.mean_abs(child, parent)));
      else
        EXPECT_TRUE(std::isnan(c.mean_abs(child, parent)));
    }
  }
  EXPECT_EQ(c.tests, expected_tests);
  EXPECT_LE(c.edge_count(), params.k * 8);
}

TEST(DasSelect, ReferenceHasSmallestMeanOfTopSet) {
  const Problem p = er1(6, 400, 4);
  const CandidateGraph c = das_select(p.data, OrderingResult::from_ordering(Ordering::identity(6)), DiscoveryParams{});
  for (Index child = 2; child < 6; ++child) {
    const Index ref = c.reference[std::size_t(child)];
    for (Index j = 0; j < child; ++j) EXPECT_LE(c.mean_abs(child, ref), c.mean_abs(child, j));
  }
}

TEST(DasSelect, CandidateRecallWithTrueOrdering) {
  double recall = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Problem p = er1(10, 1000, s);
    const CandidateGraph c = das_select(p.data, true_order(p.scm.dag), DiscoveryParams{});
    const Index edges = p.scm.dag.edge_count();
    const Index found = (c.adjacency.array() && p.scm.dag.adjacency().array()).count();
    recall += (edges ? double(found) / double(edges) : 1.0) / 10.0;
  }
  EXPECT_GE(recall, 0.85);
}

TEST(CamPrune, EmptyCandidates) {
  const Dataset data(Eigen::MatrixXd::Random(100, 4));
  const PruneResult r = cam_prune(data, Adjacency::Constant(4, 4, false), DiscoveryParams{});
  EXPECT_EQ(r.dag.edge_count(), 0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(CamPrune, RejectsCycles) {
  const Dataset data(Eigen::MatrixXd::Random(100, 2));
  Adjacency a = Adjacency::Constant(2, 2, false);
  a(0, 1) = a(1, 0) = true;
  EXPECT_THROW(cam_prune(data, a, DiscoveryParams{}), CycleDetected);
}

TEST(CamPrune, KeepsTrueParentDropsSpurious) {
  // 0 -> 1, node 2 independent; candidates 0 -> 1 and 2 -> 1.
  const Dag g = Dag::from_edges(3, {{0, 1}});
  Adjacency cand = Adjacency::Constant(3, 3, false);
  cand(0, 1) = cand(2, 1) = true;
  int hits = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Problem p = make(g, 1000, 100 + s);
    const PruneResult r = cam_prune(p.data, cand, DiscoveryParams{});
    hits += r.dag.has_edge(0, 1) && !r.dag.has_edge(2, 1);
    EXPECT_FALSE(std::isnan(r.pvalues(2, 1)));
  }
  EXPECT_GE(hits, 9);
}

TEST(CamPrune, FullDagFromTrueOrdering) {
  double total = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Problem p = er1(10, 1000, s);
    const Dag full = full_dag_from_order(topological_sort(p.scm.dag));
    total += double(shd(p.scm.dag, cam_prune(p.data, full.adjacency(), DiscoveryParams{}).dag)) / 10.0;
  }
  EXPECT_LE(total, 4.0);
}

TEST(CamPrune, TooFewSamplesKeepsEverything) {
  const Dataset data(Eigen::MatrixXd::Random(10, 3));
  const Dag full = full_dag_from_order(Ordering::identity(3));
  const PruneResult r = cam_prune(data, full.adjacency(), DiscoveryParams{});
  // Node 2 needs 15 design columns for 10 rows; node 1 fits in 8.
  EXPECT_TRUE(r.dag.has_edge(0, 2));
  EXPECT_TRUE(r.dag.has_edge(1, 2));
  EXPECT_TRUE(std::isnan(r.pvalues(0, 2)));
  EXPECT_FALSE(std::isnan(r.pvalues(0, 1)));
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("node 2"), std::string::npos);
}

TEST(Discover, SkipPruningReturnsCandidates) {
  const Problem p = er1(6, 500, 5);
  DiscoveryParams params;
  params.skip_pruning = true;
  const DiscoveryReport r = discover(p.data, params, p.scm.dag);
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r.pruned.has_value());
  EXPECT_EQ(r.final_dag->adjacency(), r.candidates->adjacency);
  EXPECT_DOUBLE_EQ(r.timings.pruning, 0.0);
}

TEST(Discover, ContainmentChainAndMetrics) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Problem p = er1(8, 500, 20 + s);
    const DiscoveryReport r = discover(p.data, DiscoveryParams{}, p.scm.dag);
    ASSERT_TRUE(r.ok());
    const Dag dense = full_dag_from_order(r.ordering->ordering);
    EXPECT_TRUE(subset(r.final_dag->adjacency(), r.candidates->adjacency));
    EXPECT_TRUE(subset(r.candidates->adjacency, dense.adjacency()));
    for (Index j = 0; j < 8; ++j) EXPECT_LE(r.candidates->adjacency.col(j).count(), 20);
    ASSERT_TRUE(r.metrics.has_value());
    EXPECT_EQ(r.metrics->shd, shd(p.scm.dag, *r.final_dag));
    EXPECT_TRUE(r.metrics->sid.has_value());
    EXPECT_GE(r.timings.ordering, 0.0);
    EXPECT_GT(r.timings.selection, 0.0);
  }
}

TEST(Discover, FailuresAreReported) {
  const Problem p = er1(4, 200, 6);
  const DiscoveryReport r = discover(p.data, DiscoveryParams{}, Dag(5));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.failure->stage, "validation");
  EXPECT_EQ(r.failure->kind, ErrorKind::Validation);
  EXPECT_FALSE(r.ordering.has_value());
}

TEST(Discover, StandardizeIsScaleFree) {
  const Problem p = er1(5, 400, 7);
  Dataset scaled = p.data;
  scaled.values.col(2) *= 40.0;
  DiscoveryParams params;
  params.standardize = true;
  EXPECT_EQ(discover(p.data, params).final_dag->adjacency(), discover(scaled, params).final_dag->adjacency());
}
