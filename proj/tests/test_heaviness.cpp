#include <gtest/gtest.h>

#include <algorithm>

#include "depheavy/error.hpp"
#include "depheavy/heaviness.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace depheavy;

namespace {

std::set<std::string> names(const DepGraph& g, const std::vector<NodeId>& v) {
  std::set<std::string> out;
  for (NodeId i : v) out.insert(g.name(i));
  return out;
}

Mean mean_of(std::pair<std::int64_t, std::int64_t> p) { return {p.first, p.second}; }

}  // namespace

// ------------------------------------------------------------- fixtures

TEST(G1, EdgeHeaviness) {
  const auto g = fixtures::g1().build();
  const auto e = edge_heaviness(g, g.id("A"), g.id("P"));
  EXPECT_EQ(e.n1, 5);
  EXPECT_EQ(e.n2, 3);
  EXPECT_EQ(e.h, 2);
  EXPECT_EQ(edge_heaviness(g, g.id("B"), g.id("P")).h, 1);
  EXPECT_THROW(edge_heaviness(g, g.id("E"), g.id("P")), NotFoundError);
}

TEST(G1, MaxHeavinessFromParents) {
  const auto g = fixtures::g1().build();
  const auto m = max_heaviness_from_parents(g, g.id("P"));
  EXPECT_EQ(m.h_max, 2);
  EXPECT_EQ(names(g, m.parents), (std::set<std::string>{"A"}));
  const auto none = max_heaviness_from_parents(g, g.id("E"));
  EXPECT_EQ(none.h_max, 0);
  EXPECT_TRUE(none.parents.empty());
}

TEST(G1, HeavinessFromUpstream) {
  const auto g = fixtures::g1().build();
  EXPECT_EQ(heaviness_from_upstream(g, g.id("C"), g.id("P")), 2);
  EXPECT_EQ(heaviness_from_upstream(g, g.id("E"), g.id("P")), 1);
  EXPECT_THROW(heaviness_from_upstream(g, g.id("P"), g.id("C")), DomainError);
}

TEST(G1, ChildAndDownstreamHeaviness) {
  const auto g = fixtures::g1().build();
  const auto C = g.id("C");
  const auto hc = heaviness_on_children(g, C);
  EXPECT_EQ(hc, (Mean{4, 2}));
  EXPECT_DOUBLE_EQ(hc.value(), 2.0);
  const auto d = heaviness_on_downstream(g, C);
  EXPECT_EQ(d.k_d, 3);
  EXPECT_EQ(d.k_id, 1);
  EXPECT_DOUBLE_EQ(d.hd.value(), 2.0);
  EXPECT_DOUBLE_EQ(d.hid.value(), 2.0);
  EXPECT_EQ(total_downstream_heaviness(g, C), 6);
  EXPECT_FALSE(heaviness_on_children(g, g.id("P")).present());
}

TEST(G1, CoHeavinessIdentity) {
  const auto g = fixtures::g1().build();
  const auto co = co_heaviness(g, g.id("A"), g.id("B"), g.id("P"));
  EXPECT_EQ(co.h_co, 2);
  EXPECT_EQ(co.s_ab_size, 5);
  EXPECT_EQ(co.s_ab_size, co.s_a_size + co.s_b_size + co.h_co);
  const auto m = max_co_heaviness(g, g.id("P"));
  EXPECT_EQ(m.h_co_max, 2);
  ASSERT_TRUE(m.pair.has_value());
  EXPECT_EQ(g.name(m.pair->first), "A");
  EXPECT_EQ(g.name(m.pair->second), "B");
  EXPECT_FALSE(max_co_heaviness(g, g.id("B")).pair.has_value());
  EXPECT_THROW(co_heaviness(g, g.id("A"), g.id("A"), g.id("P")), DomainError);
  EXPECT_THROW(co_heaviness(g, g.id("A"), g.id("C"), g.id("P")), DomainError);
}

TEST(G1, WhatIf) {
  const auto g = fixtures::g1().build();
  const auto P = g.id("P");
  const NodeId a[] = {g.id("A")};
  const auto w = whatif_demote(g, P, a);
  EXPECT_EQ(w.old_count, 5);
  EXPECT_EQ(w.new_count, 3);
  EXPECT_EQ(names(g, w.reduced), (std::set<std::string>{"A", "D"}));
  const NodeId ab[] = {g.id("A"), g.id("B")};
  EXPECT_EQ(whatif_demote(g, P, ab).new_count, 0);
  EXPECT_EQ(whatif_demote(g, P, {}).new_count, 5);
  const NodeId bad[] = {g.id("C"), g.id("E")};
  try {
    whatif_demote(g, P, bad);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('C'), std::string::npos);
    EXPECT_NE(msg.find('E'), std::string::npos);
  }
}

TEST(G1, WeakParentHeaviness) {
  auto ng = fixtures::g1();
  ng.names.push_back("W");
  ng.names.push_back("W2");
  ng.strong.push_back({"W2", "W"});
  ng.weak.push_back({"W", "P"});
  ng.weak.push_back({"E", "P"});
  const auto g = ng.build();
  EXPECT_EQ(weak_parent_heaviness(g, g.id("W"), g.id("P")), 2);
  EXPECT_EQ(weak_parent_heaviness(g, g.id("E"), g.id("P")), 0);
  EXPECT_THROW(weak_parent_heaviness(g, g.id("A"), g.id("P")), NotFoundError);
}

TEST(Fig3, HeavinessIsThree) {
  const auto g = fixtures::fig3().build();
  const auto e = edge_heaviness(g, g.id("A"), g.id("P"));
  EXPECT_EQ(e.n1, 9);
  EXPECT_EQ(e.n2, 6);
  EXPECT_EQ(e.h, 3);
}

TEST(Gini, Values) {
  const double a[] = {2, 1};
  EXPECT_NEAR(gini(a), 1.0 / 6.0, 1e-15);
  const double b[] = {5, 5, 5};
  EXPECT_EQ(gini(b), 0.0);
  const double c[] = {0, 0, 0};
  EXPECT_EQ(gini(c), 0.0);
  const double d[] = {7};
  EXPECT_EQ(gini(d), 0.0);
  EXPECT_THROW(gini(std::span<const double>{}), DomainError);
  const double neg[] = {1, -1};
  EXPECT_THROW(gini(neg), DomainError);
}

TEST(Gini, MatchesDoubleSumAndStaysBelowOne) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(std::uniform_int_distribution<int>(1, 30)(rng));
    for (auto& x : v) x = std::uniform_int_distribution<int>(0, 50)(rng);
    const double gv = gini(v);
    EXPECT_NEAR(gv, oracle::gini(v), 1e-12);
    EXPECT_GE(gv, 0.0);
    EXPECT_LT(gv, 1.0);
  }
}

// ------------------------------------------------------- oracle agreement

TEST(Oracle, PerQueryRouteMatches) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto ng = fixtures::random_dag(seed, 25, 60);
    const auto g = ng.build();
    const oracle::Oracle o(ng);
    for (NodeId p = 0; p < g.size(); ++p) {
      const auto pn = g.name(p);
      for (NodeId a : g.parents(p))
        ASSERT_EQ(edge_heaviness(g, a, p).h, o.h(g.name(a), pn)) << seed;
      g.upstream(p).for_each([&](std::size_t c) {
        ASSERT_EQ(heaviness_from_upstream(g, static_cast<NodeId>(c), p),
                  o.h_u(g.name(static_cast<NodeId>(c)), pn));
      });
      ASSERT_EQ(heaviness_on_children(g, p), mean_of(o.hc(pn)));
      const auto d = heaviness_on_downstream(g, p);
      ASSERT_EQ(d.hd, mean_of(o.hd(pn)));
      ASSERT_EQ(d.hid, mean_of(o.hid(pn)));
      const auto ps = g.parents(p);
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
          const auto c = co_heaviness(g, ps[i], ps[j], p);
          const auto oc = o.co(g.name(ps[i]), g.name(ps[j]), pn);
          ASSERT_EQ(c.h_co, oc.h_co);
          ASSERT_EQ(c.s_a_size, oc.s_a);
          ASSERT_EQ(c.s_b_size, oc.s_b);
          ASSERT_TRUE(oc.disjoint);
        }
      const auto m = max_co_heaviness(g, p);
      const auto om = o.mcohp(pn);
      ASSERT_EQ(m.h_co_max, om.first);
      ASSERT_EQ(m.pair.has_value(), om.second.has_value());
      if (m.pair) {
        ASSERT_EQ(g.name(m.pair->first), om.second->first);
        ASSERT_EQ(g.name(m.pair->second), om.second->second);
      }
    }
  }
}

TEST(Oracle, WhatIfMatches) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto ng = fixtures::random_dag(seed, 25, 60);
    const auto g = ng.build();
    const oracle::Oracle o(ng);
    for (NodeId p = 0; p < g.size(); ++p) {
      const auto ps = g.parents(p);
      for (std::size_t mask = 0; mask < (std::size_t{1} << std::min<std::size_t>(ps.size(), 4));
           ++mask) {
        std::vector<NodeId> sel;
        std::vector<std::string> seln;
        for (std::size_t i = 0; i < ps.size() && i < 4; ++i)
          if (mask >> i & 1) {
            sel.push_back(ps[i]);
            seln.push_back(g.name(ps[i]));
          }
        const auto w = whatif_demote(g, p, sel);
        const auto [old_c, new_c, reduced] = o.whatif(g.name(p), seln);
        ASSERT_EQ(w.old_count, old_c);
        ASSERT_EQ(w.new_count, new_c);
        ASSERT_EQ(names(g, w.reduced), reduced);
      }
    }
  }
}

TEST(Oracle, TableMatchesPerQueryRoute) {
  for (std::uint64_t seed = 1; seed <= 80; ++seed) {
    const auto ng = fixtures::random_dag(seed, 40, 120);
    const auto g = ng.build();
    const auto table = HeavinessTable::compute(g, 1 + seed % 3);
    const auto edges = g.strong().edges();
    for (std::size_t i = 0; i < edges.size(); ++i)
      ASSERT_EQ(table.edge_h()[i], edge_heaviness(g, edges[i].parent, edges[i].child).h);
    for (NodeId p = 0; p < g.size(); ++p) {
      const auto& r = table[p];
      ASSERT_EQ(r.n_strong, static_cast<std::int64_t>(g.upstream(p).count()));
      ASSERT_EQ(r.k_p, static_cast<std::int64_t>(g.parents(p).size()));
      ASSERT_EQ(r.k_c, static_cast<std::int64_t>(g.children(p).size()));
      const auto m = max_heaviness_from_parents(g, p);
      ASSERT_EQ(r.mhp.h_max, m.h_max);
      ASSERT_EQ(r.mhp.parents, m.parents);
      const auto mc = max_co_heaviness(g, p);
      ASSERT_EQ(r.mcohp.h_co_max, mc.h_co_max);
      ASSERT_EQ(r.mcohp.pair, mc.pair);
      ASSERT_EQ(r.hc, heaviness_on_children(g, p));
      const auto d = heaviness_on_downstream(g, p);
      ASSERT_EQ(r.hd, d.hd);
      ASSERT_EQ(r.hid, d.hid);
      ASSERT_EQ(r.k_d, d.k_d);
      ASSERT_EQ(r.k_id, d.k_id);
      ASSERT_EQ(r.total_downstream, total_downstream_heaviness(g, p));
      ASSERT_EQ(r.depth, static_cast<std::int64_t>(depth(g, p)));

      const auto prof = upstream_profile(g, p);
      ASSERT_EQ(prof.upstream_h.size(), g.upstream(p).count());
      for (const auto& [c, hu] : prof.upstream_h) ASSERT_EQ(hu, heaviness_from_upstream(g, c, p));
    }
  }
}

TEST(Oracle, TableIndependentOfThreads) {
  const auto ng = fixtures::random_dag(99, 40, 120);
  const auto g = ng.build();
  const auto a = HeavinessTable::compute(g, 1);
  const auto b = HeavinessTable::compute(g, 4);
  ASSERT_EQ(a.edge_h(), b.edge_h());
  for (NodeId p = 0; p < g.size(); ++p) {
    EXPECT_EQ(a[p].hd, b[p].hd);
    EXPECT_EQ(a[p].hid, b[p].hid);
    EXPECT_EQ(a[p].gini_from_parents, b[p].gini_from_parents);
  }
}

// ----------------------------------------------------------- properties

TEST(Properties, UpstreamHeavinessBoundsEdgeHeaviness) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto g = fixtures::random_dag(seed).build();
    for (const auto& e : g.strong().edges())
      ASSERT_GE(heaviness_from_upstream(g, e.parent, e.child),
                edge_heaviness(g, e.parent, e.child).h);
  }
}

TEST(Properties, EveryPairSatisfiesIdentity) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto g = fixtures::random_dag(seed).build();
    for (NodeId p = 0; p < g.size(); ++p) {
      const auto ps = g.parents(p);
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
          const auto c = co_heaviness(g, ps[i], ps[j], p);
          ASSERT_EQ(c.s_ab_size, c.s_a_size + c.s_b_size + c.h_co);
          ASSERT_GE(c.h_co, 0);
        }
    }
  }
}

TEST(Properties, DownstreamMeanCanFallBelowChildMean) {
  // p has ten exclusive parents and one child k; b (below k) reaches p's
  // upstream through q as well, so removing p costs b only p itself.
  fixtures::NamedGraph ng;
  ng.names = {"p", "k", "b", "q"};
  for (int i = 0; i < 10; ++i) {
    const std::string u = "u" + std::to_string(i);
    ng.names.push_back(u);
    ng.strong.push_back({u, "p"});
    ng.strong.push_back({u, "q"});
  }
  ng.strong.push_back({"p", "k"});
  ng.strong.push_back({"k", "b"});
  ng.strong.push_back({"q", "b"});
  const auto g = ng.build();
  const auto p = g.id("p");
  EXPECT_EQ(heaviness_on_children(g, p), (Mean{11, 1}));
  EXPECT_EQ(heaviness_on_downstream(g, p).hd, (Mean{12, 2}));
  EXPECT_LT(heaviness_on_downstream(g, p).hd.value(), heaviness_on_children(g, p).value());
}
