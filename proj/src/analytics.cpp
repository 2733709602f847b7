#include "depheavy/analytics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "depheavy/error.hpp"
#include "depheavy/heaviness.hpp"
#include "depheavy/parallel.hpp"

namespace depheavy {

Digraph Subgraph::local() const {
  std::vector<Edge> local_edges;
  local_edges.reserve(edges.size());
  for (const auto& e : edges)
    local_edges.push_back({static_cast<NodeId>(*local_id(e.edge.parent)),
                           static_cast<NodeId>(*local_id(e.edge.child))});
  return Digraph(nodes.size(), std::move(local_edges));
}

std::optional<std::size_t> Subgraph::local_id(NodeId global) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), global);
  if (it == nodes.end() || *it != global) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

namespace {

// Recomputes betweenness on the subgraph's own edges.
void annotate_betweenness(Subgraph& sg) {
  const Digraph local = sg.local();
  const auto bt = edge_betweenness(local);
  // local edges and sg.edges share the (parent, child) order since local ids
  // are monotone in global ids.
  for (std::size_t i = 0; i < sg.edges.size(); ++i) sg.edges[i].betweenness = bt[i];
}

Subgraph induced_by_edges(std::vector<WeightedEdge> edges) {
  Subgraph sg;
  std::sort(edges.begin(), edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) { return a.edge < b.edge; });
  for (const auto& e : edges) {
    sg.nodes.push_back(e.edge.parent);
    sg.nodes.push_back(e.edge.child);
  }
  std::sort(sg.nodes.begin(), sg.nodes.end());
  sg.nodes.erase(std::unique(sg.nodes.begin(), sg.nodes.end()), sg.nodes.end());
  sg.edges = std::move(edges);
  return sg;
}

}  // namespace

CoreGraph core_graph(const DepGraph& g, std::span<const std::int64_t> edge_h,
                     std::int64_t h_threshold) {
  const auto all = g.strong().edges();
  if (edge_h.size() != all.size())
    throw DomainError("edge heaviness does not match the graph's strong edges");
  CoreGraph core;
  core.h_threshold = h_threshold;
  std::vector<WeightedEdge> kept;
  for (std::size_t i = 0; i < all.size(); ++i) {
    core.h_total += edge_h[i];
    if (edge_h[i] >= h_threshold) {
      kept.push_back({all[i], edge_h[i], 0.0});
      core.h_retained += edge_h[i];
    }
  }
  core.graph = induced_by_edges(std::move(kept));
  annotate_betweenness(core.graph);
  return core;
}

std::vector<std::size_t> components(const Subgraph& sg) {
  std::vector<std::size_t> parent(sg.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : sg.edges) {
    const auto a = find(*sg.local_id(e.edge.parent));
    const auto b = find(*sg.local_id(e.edge.child));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> size(sg.nodes.size(), 0);
  for (std::size_t v = 0; v < sg.nodes.size(); ++v) ++size[find(v)];
  std::vector<std::size_t> out;
  for (auto s : size)
    if (s) out.push_back(s);
  std::sort(out.rbegin(), out.rend());
  return out;
}

std::vector<double> edge_betweenness(const Digraph& g, std::size_t threads) {
  const std::size_t n = g.node_count();
  const std::size_t m = g.edge_count();
  std::vector<double> total(m, 0.0);
  if (n == 0) return total;

  // Sources are processed in fixed blocks; block results are added in block
  // order so the floating-point sum is the same for any thread count.
  constexpr std::size_t kBlock = 32;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  threads = std::max<std::size_t>(1, threads);

  struct Scratch {
    std::vector<std::uint32_t> dist;
    std::vector<double> sigma, delta;
    std::vector<NodeId> order;
  };

  for (std::size_t wave = 0; wave < blocks; wave += threads) {
    const std::size_t in_wave = std::min(threads, blocks - wave);
    std::vector<std::vector<double>> partial(in_wave, std::vector<double>(m, 0.0));
    parallel_for(
        in_wave, threads,
        [&](std::size_t, std::size_t b, std::size_t e) {
          Scratch s;
          s.dist.resize(n);
          s.sigma.resize(n);
          s.delta.resize(n);
          for (std::size_t bi = b; bi < e; ++bi) {
            auto& acc = partial[bi];
            const std::size_t first = (wave + bi) * kBlock;
            for (std::size_t src = first; src < std::min(n, first + kBlock); ++src) {
              std::fill(s.dist.begin(), s.dist.end(), kUnreachable);
              std::fill(s.sigma.begin(), s.sigma.end(), 0.0);
              std::fill(s.delta.begin(), s.delta.end(), 0.0);
              s.order.clear();
              s.dist[src] = 0;
              s.sigma[src] = 1.0;
              s.order.push_back(static_cast<NodeId>(src));
              for (std::size_t h = 0; h < s.order.size(); ++h) {
                const NodeId v = s.order[h];
                for (NodeId w : g.children(v)) {
                  if (s.dist[w] == kUnreachable) {
                    s.dist[w] = s.dist[v] + 1;
                    s.order.push_back(w);
                  }
                  if (s.dist[w] == s.dist[v] + 1) s.sigma[w] += s.sigma[v];
                }
              }
              for (std::size_t h = s.order.size(); h-- > 0;) {
                const NodeId v = s.order[h];
                const auto kids = g.children(v);
                const std::size_t base = g.first_out_edge(v);
                for (std::size_t k = 0; k < kids.size(); ++k) {
                  const NodeId w = kids[k];
                  if (s.dist[w] != s.dist[v] + 1) continue;
                  const double c = s.sigma[v] / s.sigma[w] * (1.0 + s.delta[w]);
                  acc[base + k] += c;
                  s.delta[v] += c;
                }
              }
            }
          }
        },
        1);
    for (const auto& p : partial)
      for (std::size_t i = 0; i < m; ++i) total[i] += p[i];
  }
  return total;
}

KeyPaths key_paths(const CoreGraph& core, double bt_threshold) {
  KeyPaths kp;
  kp.bt_threshold = bt_threshold;
  std::vector<WeightedEdge> kept;
  for (const auto& e : core.graph.edges) {
    kp.bt_total += e.betweenness;
    if (e.betweenness >= bt_threshold) {
      kept.push_back(e);
      kp.bt_retained += e.betweenness;
    }
  }
  kp.graph = induced_by_edges(std::move(kept));
  return kp;
}

std::size_t transmission_length(const Digraph& g, NodeId p) {
  if (p >= g.node_count()) throw NotFoundError("unknown node id " + std::to_string(p));
  const auto dist = bfs_distances(g, p, true);
  std::size_t best = 0;
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (dist[v] != kUnreachable && g.children(v).empty())
      best = std::max<std::size_t>(best, dist[v]);
  return best;
}

std::size_t transmission_length(const DepGraph& g, NodeId p) {
  return transmission_length(g.strong(), p);
}

std::string_view to_string(PairRelation::Kind kind) {
  switch (kind) {
    case PairRelation::Kind::ParentChild: return "parent-child";
    case PairRelation::Kind::UpstreamDownstream: return "upstream-downstream";
    case PairRelation::Kind::CommonUpstream: return "common-upstream";
    case PairRelation::Kind::NoClearRelation: return "no-clear-relation";
  }
  return "no-clear-relation";
}

PairRelation classify_parent_pair(const DepGraph& g, NodeId a, NodeId b, NodeId p) {
  const auto co = co_heaviness(g, a, b, p);  // validates the pair
  const auto& s = g.strong();
  if (s.has_edge(a, b) || s.has_edge(b, a)) return {PairRelation::Kind::ParentChild, std::nullopt};
  if (g.upstream(a).test(b) || g.upstream(b).test(a))
    return {PairRelation::Kind::UpstreamDownstream, std::nullopt};

  const Bitset common = g.upstream(a) & g.upstream(b);
  if (common.none()) return {};
  const auto pa = upstream_profile(g, a);
  const auto pb = upstream_profile(g, b);
  auto h_u = [](const UpstreamProfile& prof, NodeId c) {
    auto it = std::lower_bound(prof.upstream_h.begin(), prof.upstream_h.end(),
                               std::pair<NodeId, std::int64_t>{c, 0});
    return it->second;
  };
  std::optional<NodeId> witness;
  common.for_each([&](std::size_t c) {
    if (witness) return;
    const auto id = static_cast<NodeId>(c);
    // h_u > 0.75 * h_co, in integers
    if (4 * h_u(pa, id) > 3 * co.h_co && 4 * h_u(pb, id) > 3 * co.h_co) witness = id;
  });
  if (witness) return {PairRelation::Kind::CommonUpstream, witness};
  return {};
}

namespace {

// Heaviness x sends to p's downstream: sum of h_u(x -> k) over k downstream
// of both x and p.
std::int64_t downstream_heaviness_via(const DepGraph& g, NodeId x, NodeId p) {
  std::int64_t total = 0;
  const Bitset targets = g.downstream(x) & g.downstream(p);
  targets.for_each(
      [&](std::size_t k) { total += heaviness_from_upstream(g, x, static_cast<NodeId>(k)); });
  return total;
}

}  // namespace

SourceScore source_score(const DepGraph& g, NodeId a, NodeId p) {
  if (a >= g.size() || p >= g.size() || !g.strong().has_edge(a, p))
    throw DomainError((a < g.size() ? g.name(a) : std::to_string(a)) +
                      " is not a strong parent of " +
                      (p < g.size() ? g.name(p) : std::to_string(p)));
  SourceScore out;
  out.via_parent = downstream_heaviness_via(g, a, p);
  const auto mhp = max_heaviness_from_parents(g, a);
  if (!mhp.parents.empty()) {
    out.mhp_parent = mhp.parents.front();
    out.via_mhp_parent = downstream_heaviness_via(g, *out.mhp_parent, p);
  }
  out.s = out.via_parent - out.via_mhp_parent;
  return out;
}

}  // namespace depheavy
