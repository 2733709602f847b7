#include <gtest/gtest.h>

#include "depheavy/error.hpp"
#include "depheavy/graph.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace depheavy;

namespace {

std::set<std::string> names(const DepGraph& g, const Bitset& b) {
  std::set<std::string> out;
  b.for_each([&](std::size_t i) { out.insert(g.name(static_cast<NodeId>(i))); });
  return out;
}

std::set<std::string> names(const DepGraph& g, const std::vector<NodeId>& v) {
  std::set<std::string> out;
  for (NodeId i : v) out.insert(g.name(i));
  return out;
}

}  // namespace

TEST(Digraph, DropsSelfLoopsAndDuplicates) {
  Digraph d(3, {{0, 1}, {0, 1}, {1, 1}, {2, 0}});
  EXPECT_EQ(d.edge_count(), 2u);
  EXPECT_TRUE(d.has_edge(0, 1));
  EXPECT_FALSE(d.has_edge(1, 1));
  EXPECT_EQ(d.edge_index(2, 0), 1u);
  EXPECT_EQ(d.parents(0).size(), 1u);
}

TEST(DepGraph, IdsFollowNames) {
  const auto g = fixtures::g1().build();
  for (NodeId v = 1; v < g.size(); ++v) EXPECT_LT(g.name(v - 1), g.name(v));
  EXPECT_EQ(g.name(g.id("P")), "P");
  EXPECT_THROW(g.id("nope"), NotFoundError);
  try {
    g.id("nope");
  } catch (const NotFoundError& e) {
    EXPECT_EQ(e.package(), "nope");
  }
}

TEST(DepGraph, CategoriesOnG1) {
  const auto g = fixtures::g1().build();
  const auto P = g.id("P"), C = g.id("C");
  using C_ = DependencyCategory;
  EXPECT_EQ(names(g, dependency_query(g, P, C_::parents)), (std::set<std::string>{"A", "B"}));
  EXPECT_EQ(names(g, dependency_query(g, P, C_::strong_dependencies)),
            (std::set<std::string>{"A", "B", "C", "D", "E"}));
  EXPECT_EQ(names(g, dependency_query(g, C, C_::children)), (std::set<std::string>{"A", "B"}));
  EXPECT_EQ(names(g, dependency_query(g, C, C_::downstream)),
            (std::set<std::string>{"A", "B", "P"}));
  EXPECT_EQ(names(g, dependency_query(g, C, C_::indirect_downstream)),
            (std::set<std::string>{"P"}));
  EXPECT_EQ(strong_dep_count(g, P), 5u);
  EXPECT_EQ(dependency_category_from_string("indirect_downstream"), C_::indirect_downstream);
  EXPECT_FALSE(dependency_category_from_string("all").has_value());
}

TEST(DepGraph, WeakParentsAreSeparate) {
  auto ng = fixtures::g1();
  ng.weak.push_back({"E", "P"});
  ng.weak.push_back({"A", "P"});  // strong already
  const auto g = ng.build();
  const auto P = g.id("P");
  EXPECT_EQ(names(g, dependency_query(g, P, DependencyCategory::weak_parents)),
            (std::set<std::string>{"E"}));
  EXPECT_FALSE(g.weak().has_edge(g.id("A"), P));
}

TEST(DepGraph, TwoCycleIsSafe) {
  const auto g = DepGraph::from_edges({"A", "B"}, {{"A", "B"}, {"B", "A"}});
  EXPECT_EQ(names(g, g.upstream(g.id("A"))), (std::set<std::string>{"B"}));
  EXPECT_EQ(names(g, g.upstream(g.id("B"))), (std::set<std::string>{"A"}));
  ASSERT_EQ(g.strong_cycles().size(), 1u);
  EXPECT_EQ(g.strong_cycles()[0].size(), 2u);
}

TEST(DepGraph, ClosuresMatchOracleAndAreDual) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto ng = seed % 3 ? fixtures::random_dag(seed, 50, 150)
                             : fixtures::random_digraph(seed, 30, 0.08);
    const auto g = ng.build();
    const oracle::Oracle o(ng);
    for (NodeId p = 0; p < g.size(); ++p) {
      ASSERT_EQ(names(g, g.upstream(p)), o.upstream(g.name(p))) << "seed " << seed;
      for (NodeId q = 0; q < g.size(); ++q)
        ASSERT_EQ(g.upstream(p).test(q), g.downstream(q).test(p)) << "seed " << seed;
    }
  }
}

TEST(DepGraph, ClosureIndependentOfThreads) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ng = fixtures::random_digraph(seed, 60, 0.05);
    const auto a = ng.build(1), b = ng.build(4);
    for (NodeId v = 0; v < a.size(); ++v) {
      ASSERT_EQ(a.upstream(v), b.upstream(v));
      ASSERT_EQ(a.downstream(v), b.downstream(v));
    }
  }
}

TEST(ReachWithout, RemovingEdgesNeverGrowsUpstream) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto ng = fixtures::random_dag(seed);
    const auto g = ng.build();
    const auto edges = g.strong().edges();
    for (NodeId p = 0; p < g.size(); ++p) {
      std::vector<Edge> removed;
      for (const auto& e : edges)
        if (e.child == p || (e.parent + seed) % 5 == 0) removed.push_back(e);
      Bitset r = reach_without(g, p, removed);
      Bitset extra = r;
      extra.subtract(g.upstream(p));
      ASSERT_TRUE(extra.none());
      std::set<std::pair<std::string, std::string>> rn;
      for (const auto& e : removed) rn.insert({g.name(e.parent), g.name(e.child)});
      ASSERT_EQ(names(g, r), oracle::Oracle(ng).upstream(g.name(p), rn));
    }
  }
}

TEST(ReachWithout, UnknownEdgeIsNotFound) {
  const auto g = fixtures::g1().build();
  const Edge bogus{g.id("E"), g.id("P")};
  EXPECT_THROW(reach_without(g, g.id("P"), std::span(&bogus, 1)), NotFoundError);
}

TEST(Distance, DepthAndDistanceOnG1) {
  const auto g = fixtures::g1().build();
  EXPECT_EQ(distance(g, g.id("E"), g.id("P")), 3u);
  EXPECT_EQ(distance(g, g.id("D"), g.id("A")), 1u);
  EXPECT_FALSE(distance(g, g.id("P"), g.id("E")).has_value());
  EXPECT_EQ(depth(g, g.id("P")), 3u);
  EXPECT_EQ(depth(g, g.id("E")), 0u);
}

TEST(Distance, DepthMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto ng = fixtures::random_dag(seed);
    const auto g = ng.build();
    const oracle::Oracle o(ng);
    for (NodeId p = 0; p < g.size(); ++p)
      ASSERT_EQ(static_cast<std::int64_t>(depth(g, p)), o.depth(g.name(p)));
  }
}

TEST(Bitset, Operations) {
  Bitset a(130), b(130);
  a.set(0);
  a.set(64);
  a.set(129);
  b.set(64);
  b.set(100);
  EXPECT_EQ(a.count(), 3u);
  EXPECT_EQ(a.intersection_count(b), 1u);
  EXPECT_TRUE(a.intersects(b));
  EXPECT_EQ((a | b).count(), 4u);
  a.subtract(b);
  EXPECT_EQ(a.to_vector(), (std::vector<std::size_t>{0, 129}));
  a.clear();
  EXPECT_TRUE(a.none());
}
