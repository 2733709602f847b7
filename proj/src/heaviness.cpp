#include "depheavy/heaviness.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "depheavy/error.hpp"

namespace depheavy {

namespace {

void require_strong_edge(const DepGraph& g, NodeId parent, NodeId child) {
  if (parent >= g.size() || child >= g.size() || !g.strong().has_edge(parent, child))
    throw NotFoundError("no strong edge " +
                        (parent < g.size() ? g.name(parent) : std::to_string(parent)) + " -> " +
                        (child < g.size() ? g.name(child) : std::to_string(child)));
}

// Upstream members of p that disappear when `removed` edges are skipped.
Bitset reduced_set(const DepGraph& g, NodeId p, std::span<const Edge> removed) {
  Bitset lost = g.upstream(p);
  lost.subtract(reach_without(g, p, removed));
  return lost;
}

Bitset inclusive_upstream(const DepGraph& g, NodeId v) {
  Bitset b = g.upstream(v);
  b.set(v);
  return b;
}

}  // namespace

EdgeHeaviness edge_heaviness(const DepGraph& g, NodeId parent, NodeId child) {
  require_strong_edge(g, parent, child);
  const Edge e{parent, child};
  EdgeHeaviness out{parent, child, 0, 0, 0};
  out.n1 = static_cast<std::int64_t>(g.upstream(child).count());
  out.n2 = static_cast<std::int64_t>(reach_without(g, child, std::span(&e, 1)).count());
  out.h = out.n1 - out.n2;
  return out;
}

std::int64_t weak_parent_heaviness(const DepGraph& g, NodeId weak_parent, NodeId child) {
  if (weak_parent >= g.size() || child >= g.size() || !g.weak().has_edge(weak_parent, child))
    throw NotFoundError("no weak edge " +
                        (weak_parent < g.size() ? g.name(weak_parent) : std::to_string(weak_parent)) +
                        " -> " + (child < g.size() ? g.name(child) : std::to_string(child)));
  Bitset promoted = g.upstream(child) | g.upstream(weak_parent);
  promoted.set(weak_parent);
  promoted.reset(child);
  return static_cast<std::int64_t>(promoted.count()) -
         static_cast<std::int64_t>(g.upstream(child).count());
}

ParentArgmax max_heaviness_from_parents(const DepGraph& g, NodeId p) {
  ParentArgmax out;
  for (NodeId a : g.parents(p)) {
    const auto h = edge_heaviness(g, a, p).h;
    if (out.parents.empty() || h > out.h_max) {
      out.h_max = h;
      out.parents = {a};
    } else if (h == out.h_max) {
      out.parents.push_back(a);
    }
  }
  return out;
}

std::int64_t heaviness_from_upstream(const DepGraph& g, NodeId c, NodeId p) {
  if (p >= g.size() || c >= g.size()) throw NotFoundError("unknown package id");
  if (!g.upstream(p).test(c))
    throw DomainError(g.name(c) + " is not upstream of " + g.name(p));
  const auto n1 = static_cast<std::int64_t>(g.upstream(p).count());
  const auto n2 = static_cast<std::int64_t>(
      reach_without_if(g, p, [c](const Edge& e) { return e.parent == c; }).count());
  return n1 - n2;
}

Mean heaviness_on_children(const DepGraph& g, NodeId p) {
  Mean m;
  for (NodeId child : g.children(p)) {
    m.sum += edge_heaviness(g, p, child).h;
    ++m.count;
  }
  return m;
}

DownstreamHeaviness heaviness_on_downstream(const DepGraph& g, NodeId p) {
  DownstreamHeaviness out;
  const auto kids = g.children(p);
  g.downstream(p).for_each([&](std::size_t b) {
    const auto hu = heaviness_from_upstream(g, p, static_cast<NodeId>(b));
    out.hd.sum += hu;
    ++out.hd.count;
    if (!std::binary_search(kids.begin(), kids.end(), static_cast<NodeId>(b))) {
      out.hid.sum += hu;
      ++out.hid.count;
    }
  });
  out.k_d = out.hd.count;
  out.k_id = out.hid.count;
  return out;
}

std::int64_t total_downstream_heaviness(const DepGraph& g, NodeId p) {
  return heaviness_on_downstream(g, p).hd.sum;
}

CoHeaviness co_heaviness(const DepGraph& g, NodeId a, NodeId b, NodeId p) {
  if (a == b) throw DomainError("co-heaviness needs two distinct parents");
  for (NodeId x : {a, b})
    if (x >= g.size() || p >= g.size() || !g.strong().has_edge(x, p))
      throw DomainError((x < g.size() ? g.name(x) : std::to_string(x)) +
                        " is not a strong parent of " +
                        (p < g.size() ? g.name(p) : std::to_string(p)));

  const Edge ea{a, p}, eb{b, p};
  const Edge both[] = {ea, eb};
  const Bitset s_a = reduced_set(g, p, std::span(&ea, 1));
  const Bitset s_b = reduced_set(g, p, std::span(&eb, 1));
  Bitset s_ab = reduced_set(g, p, both);
  if (s_a.intersects(s_b))
    throw std::logic_error("heaviness sets of " + g.name(a) + " and " + g.name(b) + " on " +
                           g.name(p) + " overlap");

  CoHeaviness out{a, b, p, 0, 0, 0, 0};
  out.s_a_size = static_cast<std::int64_t>(s_a.count());
  out.s_b_size = static_cast<std::int64_t>(s_b.count());
  out.s_ab_size = static_cast<std::int64_t>(s_ab.count());
  s_ab.subtract(s_a);
  s_ab.subtract(s_b);
  out.h_co = static_cast<std::int64_t>(s_ab.count());
  return out;
}

PairArgmax max_co_heaviness(const DepGraph& g, NodeId p) {
  PairArgmax out;
  const auto parents = g.parents(p);
  if (parents.size() < 2) return out;

  std::vector<Bitset> incl;
  incl.reserve(parents.size());
  for (NodeId a : parents) incl.push_back(inclusive_upstream(g, a));

  // Pairs are visited in lexicographic order, so a later pair must be
  // strictly better to win; the shared-ancestry count bounds h_co.
  out.pair = {parents[0], parents[1]};
  for (std::size_t i = 0; i < parents.size(); ++i)
    for (std::size_t j = i + 1; j < parents.size(); ++j) {
      const auto bound = static_cast<std::int64_t>(incl[i].intersection_count(incl[j]));
      if (bound <= out.h_co_max) continue;
      const auto co = co_heaviness(g, parents[i], parents[j], p).h_co;
      if (co > out.h_co_max) {
        out.h_co_max = co;
        out.pair = {parents[i], parents[j]};
      }
    }
  return out;
}

double gini(std::span<const double> values) {
  if (values.empty()) throw DomainError("gini of an empty sequence");
  const auto n = static_cast<double>(values.size());
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) {
    if (v < 0) throw DomainError("gini needs non-negative values");
    total += v;
  }
  if (values.size() == 1 || total == 0.0) return 0.0;
  // sum over i<j of (x_j - x_i) for sorted x
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    pair_sum += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
  const double mean = total / n;
  return (2.0 * pair_sum) / (2.0 * n * n * mean);
}

WhatIf whatif_demote(const DepGraph& g, NodeId p, std::span<const NodeId> parents) {
  if (p >= g.size()) throw NotFoundError("unknown package id " + std::to_string(p));
  std::vector<NodeId> demoted(parents.begin(), parents.end());
  std::sort(demoted.begin(), demoted.end());
  demoted.erase(std::unique(demoted.begin(), demoted.end()), demoted.end());

  std::string offenders;
  for (NodeId a : demoted)
    if (a >= g.size() || !g.strong().has_edge(a, p))
      offenders += (offenders.empty() ? "" : ", ") +
                   (a < g.size() ? g.name(a) : std::to_string(a));
  if (!offenders.empty())
    throw DomainError("not strong parents of " + g.name(p) + ": " + offenders);

  std::vector<Edge> removed;
  for (NodeId a : demoted) removed.push_back({a, p});
  const Bitset lost = reduced_set(g, p, removed);

  WhatIf out;
  out.old_count = static_cast<std::int64_t>(g.upstream(p).count());
  out.reduced = lost.to_vector<NodeId>();
  out.new_count = out.old_count - static_cast<std::int64_t>(out.reduced.size());
  return out;
}

}  // namespace depheavy
