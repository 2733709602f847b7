#include <gtest/gtest.h>

#include <functional>
#include <map>

#include "depheavy/analytics.hpp"
#include "depheavy/error.hpp"
#include "depheavy/heaviness.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace depheavy;

namespace {

// Enumerates every shortest path of every reachable ordered pair.
std::vector<double> brute_force_betweenness(const Digraph& g) {
  const auto n = static_cast<NodeId>(g.node_count());
  std::vector<double> bt(g.edge_count(), 0.0);
  for (NodeId s = 0; s < n; ++s) {
    const auto dist = bfs_distances(g, s, true);
    for (NodeId t = 0; t < n; ++t) {
      if (t == s || dist[t] == kUnreachable) continue;
      std::vector<std::vector<std::size_t>> paths;
      std::vector<std::size_t> cur;
      std::function<void(NodeId)> walk = [&](NodeId v) {
        if (v == t) {
          paths.push_back(cur);
          return;
        }
        for (NodeId w : g.children(v)) {
          if (dist[w] != dist[v] + 1 || dist[w] > dist[t]) continue;
          cur.push_back(*g.edge_index(v, w));
          walk(w);
          cur.pop_back();
        }
      };
      walk(s);
      for (const auto& p : paths)
        for (auto e : p) bt[e] += 1.0 / static_cast<double>(paths.size());
    }
  }
  return bt;
}

}  // namespace

TEST(Betweenness, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto g = fixtures::random_digraph(seed, 15, 0.2).build();
    const auto bt = edge_betweenness(g.strong());
    const auto ref = brute_force_betweenness(g.strong());
    ASSERT_EQ(bt.size(), ref.size());
    for (std::size_t i = 0; i < bt.size(); ++i) ASSERT_NEAR(bt[i], ref[i], 1e-9) << seed;
  }
}

TEST(Betweenness, SumEqualsPairwiseDistances) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto g = fixtures::random_digraph(seed, 40, 0.06).build();
    const auto bt = edge_betweenness(g.strong());
    double sum = 0, dist_sum = 0;
    for (double b : bt) sum += b;
    for (NodeId s = 0; s < g.size(); ++s)
      for (auto d : bfs_distances(g.strong(), s, true))
        if (d != kUnreachable) dist_sum += d;
    ASSERT_NEAR(sum, dist_sum, 1e-9);
  }
}

TEST(Betweenness, BitIdenticalAcrossThreads) {
  const auto g = fixtures::random_digraph(5, 200, 0.02).build();
  const auto a = edge_betweenness(g.strong(), 1);
  const auto b = edge_betweenness(g.strong(), 3);
  ASSERT_EQ(a, b);
}

TEST(CoreGraph, G1FlowFraction) {
  const auto g = fixtures::g1().build();
  const auto table = HeavinessTable::compute(g);
  std::int64_t total = 0;
  for (auto h : table.edge_h()) total += h;
  EXPECT_EQ(total, 9);
  const auto core = core_graph(g, table.edge_h(), 2);
  EXPECT_EQ(core.h_retained, 6);
  EXPECT_EQ(core.h_total, 9);
  EXPECT_DOUBLE_EQ(core.flow_fraction(), 6.0 / 9.0);
  EXPECT_EQ(core.graph.edges.size(), 3u);
  EXPECT_EQ(core.graph.nodes.size(), 4u);
  EXPECT_EQ(components(core.graph), (std::vector<std::size_t>{4}));
  for (const auto& e : core.graph.edges) EXPECT_GE(e.h, 2);
  EXPECT_THROW(core_graph(g, std::vector<std::int64_t>{1, 2}, 2), DomainError);
}

TEST(CoreGraph, ThresholdIsMonotone) {
  const auto g = fixtures::random_dag(3, 40, 120).build();
  const auto table = HeavinessTable::compute(g);
  std::size_t prev = g.strong().edge_count() + 1;
  for (std::int64_t t = 0; t < 10; ++t) {
    const auto core = core_graph(g, table.edge_h(), t);
    EXPECT_LE(core.graph.edges.size(), prev);
    prev = core.graph.edges.size();
  }
}

TEST(Components, SizesDescending) {
  Subgraph sg;
  sg.nodes = {0, 1, 2, 3, 4};
  sg.edges = {{{0, 1}, 1, 0}, {{3, 4}, 1, 0}, {{1, 2}, 1, 0}};
  EXPECT_EQ(components(sg), (std::vector<std::size_t>{3, 2}));
}

TEST(KeyPaths, KeepsHighBetweennessEdges) {
  const auto g = fixtures::g1().build();
  const auto table = HeavinessTable::compute(g);
  const auto core = core_graph(g, table.edge_h(), 1);
  const auto kp = key_paths(core, 2.0);
  for (const auto& e : kp.graph.edges) EXPECT_GE(e.betweenness, 2.0);
  double total = 0;
  for (const auto& e : core.graph.edges) total += e.betweenness;
  EXPECT_DOUBLE_EQ(kp.bt_total, total);
  EXPECT_LE(kp.flow_fraction(), 1.0);
}

TEST(TransmissionLength, G1) {
  const auto g = fixtures::g1().build();
  EXPECT_EQ(transmission_length(g, g.id("E")), 3u);
  EXPECT_EQ(transmission_length(g, g.id("P")), 0u);
  EXPECT_EQ(transmission_length(g, g.id("D")), 2u);
}

TEST(PairRelation, G1CommonUpstream) {
  const auto g = fixtures::g1().build();
  const auto r = classify_parent_pair(g, g.id("A"), g.id("B"), g.id("P"));
  EXPECT_EQ(r.kind, PairRelation::Kind::CommonUpstream);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(g.name(*r.witness), "C");
  EXPECT_EQ(to_string(r.kind), "common-upstream");
}

TEST(PairRelation, ParentChildAndUpstream) {
  const auto g = DepGraph::from_edges({"P", "A", "B", "C"},
                                      {{"A", "P"}, {"B", "P"}, {"C", "P"}, {"A", "B"}, {"C", "A"}});
  EXPECT_EQ(classify_parent_pair(g, g.id("A"), g.id("B"), g.id("P")).kind,
            PairRelation::Kind::ParentChild);
  EXPECT_EQ(classify_parent_pair(g, g.id("B"), g.id("C"), g.id("P")).kind,
            PairRelation::Kind::UpstreamDownstream);
}

TEST(PairRelation, NoClearRelation) {
  const auto g = DepGraph::from_edges({"P", "A", "B"}, {{"A", "P"}, {"B", "P"}});
  const auto r = classify_parent_pair(g, g.id("A"), g.id("B"), g.id("P"));
  EXPECT_EQ(r.kind, PairRelation::Kind::NoClearRelation);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(SourceScore, G2) {
  const auto g = fixtures::g2().build();
  const auto s = source_score(g, g.id("A"), g.id("P"));
  EXPECT_EQ(s.via_parent, 2);
  ASSERT_TRUE(s.mhp_parent.has_value());
  EXPECT_EQ(g.name(*s.mhp_parent), "C");
  EXPECT_EQ(s.via_mhp_parent, 2);
  EXPECT_EQ(s.s, 0);
  EXPECT_THROW(source_score(g, g.id("E"), g.id("P")), DomainError);
}

TEST(SourceScore, RootParentHasNoSecondTerm) {
  const auto g = fixtures::g2().build();
  const auto s = source_score(g, g.id("E"), g.id("C"));
  EXPECT_FALSE(s.mhp_parent.has_value());
  EXPECT_EQ(s.s, s.via_parent);
}

TEST(SourceScore, MatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto ng = fixtures::random_dag(seed, 25, 60);
    const auto g = ng.build();
    const oracle::Oracle o(ng);
    for (const auto& e : g.strong().edges())
      ASSERT_EQ(source_score(g, e.parent, e.child).s,
                o.source_score(g.name(e.parent), g.name(e.child)));
  }
}
