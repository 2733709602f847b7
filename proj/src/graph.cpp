#include "depheavy/graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>

#include "depheavy/error.hpp"
#include "depheavy/parallel.hpp"

namespace depheavy {

// ---------------------------------------------------------------- Digraph

Digraph::Digraph(std::size_t node_count, std::vector<Edge> edges) {
  std::erase_if(edges, [](const Edge& e) { return e.parent == e.child; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  out_offsets_.assign(node_count + 1, 0);
  in_offsets_.assign(node_count + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.parent + 1];
    ++in_offsets_[e.child + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  out_targets_.resize(edges_.size());
  in_sources_.resize(edges_.size());
  std::vector<std::size_t> out_pos(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_pos(in_offsets_.begin(), in_offsets_.end() - 1);
  // edges_ sorted by parent then child, so both lists come out ascending
  for (const auto& e : edges_) out_targets_[out_pos[e.parent]++] = e.child;
  std::vector<Edge> by_child = edges_;
  std::sort(by_child.begin(), by_child.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.child, a.parent) < std::tie(b.child, b.parent); });
  for (const auto& e : by_child) in_sources_[in_pos[e.child]++] = e.parent;
}

std::optional<std::size_t> Digraph::edge_index(NodeId parent, NodeId child) const noexcept {
  if (parent >= node_count() || child >= node_count()) return std::nullopt;
  const Edge key{parent, child};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

// ------------------------------------------------------ reachability index

namespace {

struct Components {
  std::vector<std::uint32_t> of;                  // node -> component
  std::vector<std::vector<NodeId>> members;       // in Tarjan emission order
};

// Iterative Tarjan following child edges. Components are emitted after
// every component reachable from them, i.e. sinks first.
Components strongly_connected(const Digraph& g) {
  const std::size_t n = g.node_count();
  constexpr std::uint32_t kNone = ~std::uint32_t{0};
  std::vector<std::uint32_t> index(n, kNone), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<NodeId> stack;
  Components out;
  out.of.assign(n, kNone);
  std::uint32_t counter = 0;

  struct Frame {
    NodeId v;
    std::size_t next;
  };
  std::vector<Frame> call;
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& f = call.back();
      const auto kids = g.children(f.v);
      if (f.next < kids.size()) {
        const NodeId w = kids[f.next++];
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const NodeId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<NodeId> comp;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          out.of[w] = static_cast<std::uint32_t>(out.members.size());
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.members.push_back(std::move(comp));
      }
    }
  }
  return out;
}

// Closure along `preds` (parents for upstream, children for downstream).
// Components are grouped into levels by longest predecessor chain and each
// level is filled in parallel; every row depends only on earlier levels.
std::vector<Bitset> closure(const Digraph& g, const Components& comps, bool upstream,
                            std::size_t threads) {
  const std::size_t n = g.node_count();
  const std::size_t nc = comps.members.size();
  auto preds = [&](NodeId v) { return upstream ? g.parents(v) : g.children(v); };

  // Emission order is sinks-first along child edges.
  std::vector<std::uint32_t> order(nc);
  std::iota(order.begin(), order.end(), 0u);
  if (upstream) std::reverse(order.begin(), order.end());

  std::vector<std::uint32_t> level(nc, 0);
  std::uint32_t max_level = 0;
  for (std::uint32_t c : order) {
    std::uint32_t lv = 0;
    for (NodeId v : comps.members[c])
      for (NodeId p : preds(v))
        if (comps.of[p] != c) lv = std::max(lv, level[comps.of[p]] + 1);
    level[c] = lv;
    max_level = std::max(max_level, lv);
  }
  std::vector<std::vector<std::uint32_t>> by_level(max_level + 1);
  for (std::uint32_t c = 0; c < nc; ++c) by_level[level[c]].push_back(c);

  std::vector<Bitset> rows(n);
  // Component closure lives in the row of its first member until the
  // members are finalized.
  for (const auto& lv : by_level) {
    parallel_for(lv.size(), threads, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const auto c = lv[i];
        const auto& mem = comps.members[c];
        Bitset acc(n);
        for (NodeId v : mem)
          for (NodeId p : preds(v)) {
            const auto pc = comps.of[p];
            if (pc == c) continue;
            acc |= rows[comps.members[pc].front()];
            for (NodeId q : comps.members[pc]) acc.set(q);
          }
        rows[mem.front()] = std::move(acc);
      }
    });
  }
  // Expand components: members see each other but not themselves.
  for (const auto& mem : comps.members) {
    if (mem.size() == 1) continue;
    Bitset base = rows[mem.front()];
    for (NodeId v : mem) base.set(v);
    for (NodeId v : mem) {
      rows[v] = base;
      rows[v].reset(v);
    }
  }
  return rows;
}

}  // namespace

void DepGraph::finalize(std::size_t threads) {
  index_.clear();
  for (NodeId v = 0; v < names_.size(); ++v) index_.emplace(names_[v], v);
  const auto comps = strongly_connected(strong_);
  cycles_.clear();
  for (const auto& mem : comps.members)
    if (mem.size() > 1) cycles_.push_back(mem);
  std::sort(cycles_.begin(), cycles_.end());
  upstream_ = closure(strong_, comps, true, threads);
  downstream_ = closure(strong_, comps, false, threads);
}

DepGraph DepGraph::build(const PackageDatabase& db, std::size_t threads) {
  DepGraph g;
  for (const auto& [name, rec] : db.packages) {
    if (db.excluded_names.contains(name)) continue;
    g.names_.push_back(name);
    g.repositories_.push_back(rec.repository);
  }
  // db.packages is a std::map, so names_ is already sorted.
  std::unordered_map<std::string_view, NodeId> ids;
  for (NodeId v = 0; v < g.names_.size(); ++v) ids.emplace(g.names_[v], v);

  std::vector<Edge> strong, weak;
  for (const auto& [name, rec] : db.packages) {
    auto child = ids.find(name);
    if (child == ids.end()) continue;
    for (const auto& d : rec.declarations) {
      if (d.external) continue;
      auto parent = ids.find(d.name);
      if (parent == ids.end() || parent->second == child->second) continue;
      (is_strong(d.field_kind) ? strong : weak).push_back({parent->second, child->second});
    }
  }
  g.strong_ = Digraph(g.names_.size(), std::move(strong));
  std::erase_if(weak, [&](const Edge& e) { return g.strong_.has_edge(e.parent, e.child); });
  g.weak_ = Digraph(g.names_.size(), std::move(weak));
  g.finalize(threads);
  return g;
}

DepGraph DepGraph::from_edges(std::vector<std::string> names,
                              const std::vector<std::pair<std::string, std::string>>& strong,
                              const std::vector<std::pair<std::string, std::string>>& weak,
                              std::size_t threads) {
  PackageDatabase db;
  for (auto& n : names) db.packages[n].name = n;
  auto add = [&](const auto& edges, FieldKind kind) {
    for (const auto& [parent, child] : edges) {
      for (const auto* n : {&parent, &child}) db.packages[*n].name = *n;
      db.packages[child].declarations.push_back({parent, kind, std::nullopt, false});
    }
  };
  add(strong, FieldKind::Imports);
  add(weak, FieldKind::Suggests);
  return build(db, threads);
}

std::optional<NodeId> DepGraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId DepGraph::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw NotFoundError("unknown package '" + std::string(name) + "'", std::string(name));
}

// ---------------------------------------------------------------- queries

std::optional<DependencyCategory> dependency_category_from_string(std::string_view s) {
  static const std::map<std::string_view, DependencyCategory> table = {
      {"parents", DependencyCategory::parents},
      {"weak_parents", DependencyCategory::weak_parents},
      {"strong_dependencies", DependencyCategory::strong_dependencies},
      {"children", DependencyCategory::children},
      {"downstream", DependencyCategory::downstream},
      {"indirect_downstream", DependencyCategory::indirect_downstream},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

namespace {
void check_node(const DepGraph& g, NodeId p) {
  if (p >= g.size()) throw NotFoundError("unknown package id " + std::to_string(p));
}
}  // namespace

std::vector<NodeId> dependency_query(const DepGraph& g, NodeId p, DependencyCategory category) {
  check_node(g, p);
  switch (category) {
    case DependencyCategory::parents: {
      auto s = g.parents(p);
      return {s.begin(), s.end()};
    }
    case DependencyCategory::weak_parents: {
      auto s = g.weak().parents(p);
      return {s.begin(), s.end()};
    }
    case DependencyCategory::strong_dependencies: return g.upstream(p).to_vector<NodeId>();
    case DependencyCategory::children: {
      auto s = g.children(p);
      return {s.begin(), s.end()};
    }
    case DependencyCategory::downstream: return g.downstream(p).to_vector<NodeId>();
    case DependencyCategory::indirect_downstream: {
      Bitset d = g.downstream(p);
      for (NodeId c : g.children(p)) d.reset(c);
      return d.to_vector<NodeId>();
    }
  }
  return {};
}

std::size_t strong_dep_count(const DepGraph& g, NodeId p) {
  check_node(g, p);
  return g.upstream(p).count();
}

Bitset reach_without_if(const DepGraph& g, NodeId p,
                        const std::function<bool(const Edge&)>& removed) {
  Bitset seen(g.size());
  std::vector<NodeId> queue{p};
  std::vector<char> visited(g.size(), 0);
  visited[p] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId u : g.parents(v)) {
      if (visited[u] || removed(Edge{u, v})) continue;
      visited[u] = 1;
      queue.push_back(u);
      if (u != p) seen.set(u);
    }
  }
  return seen;
}

Bitset reach_without(const DepGraph& g, NodeId p, std::span<const Edge> removed_edges) {
  check_node(g, p);
  std::vector<Edge> removed(removed_edges.begin(), removed_edges.end());
  for (const auto& e : removed)
    if (!g.strong().has_edge(e.parent, e.child))
      throw NotFoundError("no strong edge " +
                          (e.parent < g.size() ? g.name(e.parent) : std::to_string(e.parent)) +
                          " -> " +
                          (e.child < g.size() ? g.name(e.child) : std::to_string(e.child)));
  std::sort(removed.begin(), removed.end());
  return reach_without_if(g, p, [&](const Edge& e) {
    return std::binary_search(removed.begin(), removed.end(), e);
  });
}

std::vector<std::uint32_t> bfs_distances(const Digraph& g, NodeId source, bool forward) {
  std::vector<std::uint32_t> dist(g.node_count(), kUnreachable);
  std::vector<NodeId> queue{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    for (NodeId w : forward ? g.children(v) : g.parents(v)) {
      if (dist[w] != kUnreachable) continue;
      dist[w] = dist[v] + 1;
      queue.push_back(w);
    }
  }
  return dist;
}

std::optional<std::size_t> distance(const DepGraph& g, NodeId a, NodeId b) {
  check_node(g, a);
  check_node(g, b);
  if (a == b) return 0;
  if (!g.downstream(a).test(b)) return std::nullopt;
  return bfs_distances(g.strong(), a, true)[b];
}

std::size_t depth(const DepGraph& g, NodeId p) {
  check_node(g, p);
  const auto dist = bfs_distances(g.strong(), p, false);
  std::size_t best = 0;
  for (auto d : dist)
    if (d != kUnreachable) best = std::max<std::size_t>(best, d);
  return best;
}

}  // namespace depheavy
