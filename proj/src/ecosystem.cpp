// Whole-ecosystem heaviness via dominator trees.
//
// For a package p, walk the strong graph backwards (child -> parent) from
// p. An upstream package u drops out of p's strong dependencies after some
// edges are removed exactly when every u -> p path uses one of them. So:
//
//   h_u(c -> p) = number of upstream nodes dominated by c (c included)
//   h(a -> p)   = number of nodes dominated by a virtual node spliced
//                 onto the edge a -> p
//
// One Lengauer-Tarjan pass per package yields h for all of its in-edges
// and h_u for all of its upstream packages. Summing h_u over targets gives
// HD/HID/total heaviness for every package in O(sum of upstream sizes).

#include <algorithm>
#include <numeric>

#include "depheavy/error.hpp"
#include "depheavy/heaviness.hpp"
#include "depheavy/parallel.hpp"

namespace depheavy {

namespace {

constexpr std::int32_t kNil = -1;

// Flow graph over p's upstream, local ids in DFS preorder (root p = 0).
// Virtual node k (one per strong parent of p) sits between the root and
// parent k.
class Workspace {
 public:
  explicit Workspace(std::size_t n) : local_of_(n, kNil) {}

  void analyze(const DepGraph& g, NodeId p) {
    build(g, p);
    dominators();
  }

  std::int32_t size() const { return static_cast<std::int32_t>(global_.size()); }
  bool is_real(std::int32_t v) const { return virtual_k_[v] < 0; }
  NodeId global(std::int32_t v) const { return global_[v]; }
  std::int32_t local(NodeId u) const { return local_of_[u]; }
  std::int32_t virtual_of_parent(std::size_t k) const { return virtual_local_[k]; }
  /// Real nodes in the dominator subtree of v (v included if real).
  std::int64_t dominated(std::int32_t v) const { return real_count_[v]; }
  std::int64_t real_nodes() const { return real_nodes_; }

  /// Longest BFS distance from the root over real nodes.
  std::int64_t max_depth() {
    dist_.assign(global_.size(), kNil);
    queue_.clear();
    queue_.push_back(0);
    dist_[0] = 0;
    std::int32_t best = 0;
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      const auto v = queue_[h];
      for (auto i = succ_off_[v]; i < succ_off_[v + 1]; ++i) {
        const auto w = succ_[i];
        if (dist_[w] != kNil) continue;
        dist_[w] = dist_[v] + 1;
        if (is_real(w)) best = std::max(best, dist_[w]);
        queue_.push_back(w);
      }
    }
    return best > 0 ? best - 1 : 0;  // each path starts root -> virtual
  }

  /// Real non-root nodes unreachable from the root when virtual nodes a
  /// and b are cut.
  std::int64_t unreachable_without(std::int32_t va, std::int32_t vb) {
    mark_.assign(global_.size(), 0);
    queue_.clear();
    queue_.push_back(0);
    mark_[0] = 1;
    mark_[va] = mark_[vb] = 1;
    std::int64_t reached = 0;
    for (std::size_t h = 0; h < queue_.size(); ++h) {
      const auto v = queue_[h];
      for (auto i = succ_off_[v]; i < succ_off_[v + 1]; ++i) {
        const auto w = succ_[i];
        if (mark_[w]) continue;
        mark_[w] = 1;
        if (is_real(w)) ++reached;
        queue_.push_back(w);
      }
    }
    return real_nodes_ - 1 - reached;
  }

  void release() {
    for (NodeId u : global_)
      if (u != kVirtualGlobal) local_of_[u] = kNil;
  }

 private:
  static constexpr NodeId kVirtualGlobal = ~NodeId{0};

  std::int32_t add_node(NodeId u, std::int32_t k, std::int32_t parent) {
    const auto id = static_cast<std::int32_t>(global_.size());
    global_.push_back(u);
    virtual_k_.push_back(k);
    dfs_parent_.push_back(parent);
    if (k < 0) {
      local_of_[u] = id;
      ++real_nodes_;
    } else {
      virtual_local_[static_cast<std::size_t>(k)] = id;
    }
    return id;
  }

  void build(const DepGraph& g, NodeId p) {
    global_.clear();
    virtual_k_.clear();
    dfs_parent_.clear();
    edges_.clear();
    real_nodes_ = 0;
    const auto root_parents = g.parents(p);
    virtual_local_.assign(root_parents.size(), kNil);

    // Iterative DFS; stack holds (local id, next successor index).
    add_node(p, -1, kNil);
    stack_.clear();
    stack_.push_back({0, 0});
    while (!stack_.empty()) {
      auto& [v, next] = stack_.back();
      std::int32_t target = kNil;
      bool have = false;
      if (v == 0) {
        if (next < root_parents.size()) {
          const auto k = static_cast<std::int32_t>(next++);
          target = add_node(kVirtualGlobal, k, v);
          edges_.push_back({v, target});
          stack_.push_back({target, 0});
          continue;
        }
      } else if (!is_real(v)) {
        if (next == 0) {
          ++next;
          const NodeId u = root_parents[static_cast<std::size_t>(virtual_k_[v])];
          target = local_of_[u];
          have = true;
          if (target == kNil) {
            target = add_node(u, -1, v);
            edges_.push_back({v, target});
            stack_.push_back({target, 0});
            continue;
          }
        }
      } else {
        const auto ps = g.parents(global_[v]);
        if (next < ps.size()) {
          const NodeId u = ps[next++];
          target = local_of_[u];
          have = true;
          if (target == kNil) {
            target = add_node(u, -1, v);
            edges_.push_back({v, target});
            stack_.push_back({target, 0});
            continue;
          }
        }
      }
      if (have) {
        edges_.push_back({v, target});
        continue;
      }
      stack_.pop_back();
    }

    const auto n = global_.size();
    succ_off_.assign(n + 1, 0);
    pred_off_.assign(n + 1, 0);
    for (const auto& [a, b] : edges_) {
      ++succ_off_[static_cast<std::size_t>(a) + 1];
      ++pred_off_[static_cast<std::size_t>(b) + 1];
    }
    std::partial_sum(succ_off_.begin(), succ_off_.end(), succ_off_.begin());
    std::partial_sum(pred_off_.begin(), pred_off_.end(), pred_off_.begin());
    succ_.resize(edges_.size());
    pred_.resize(edges_.size());
    cursor_.assign(succ_off_.begin(), succ_off_.end() - 1);
    for (const auto& [a, b] : edges_) succ_[cursor_[a]++] = b;
    cursor_.assign(pred_off_.begin(), pred_off_.end() - 1);
    for (const auto& [a, b] : edges_) pred_[cursor_[b]++] = a;
  }

  std::int32_t eval(std::int32_t v) {
    if (ancestor_[v] == kNil) return v;
    path_.clear();
    std::int32_t x = v;
    while (ancestor_[ancestor_[x]] != kNil) {
      path_.push_back(x);
      x = ancestor_[x];
    }
    while (!path_.empty()) {
      const auto y = path_.back();
      path_.pop_back();
      const auto a = ancestor_[y];
      if (semi_[label_[a]] < semi_[label_[y]]) label_[y] = label_[a];
      ancestor_[y] = ancestor_[a];
    }
    return label_[v];
  }

  // Lengauer-Tarjan with path compression. Local ids are DFS preorder, so
  // vertex(i) == i.
  void dominators() {
    const auto n = static_cast<std::int32_t>(global_.size());
    semi_.resize(static_cast<std::size_t>(n));
    label_.resize(static_cast<std::size_t>(n));
    std::iota(semi_.begin(), semi_.end(), 0);
    std::iota(label_.begin(), label_.end(), 0);
    ancestor_.assign(static_cast<std::size_t>(n), kNil);
    idom_.assign(static_cast<std::size_t>(n), 0);
    bucket_head_.assign(static_cast<std::size_t>(n), kNil);
    bucket_next_.assign(static_cast<std::size_t>(n), kNil);

    for (std::int32_t w = n - 1; w >= 1; --w) {
      for (auto i = pred_off_[w]; i < pred_off_[w + 1]; ++i) {
        const auto u = eval(pred_[i]);
        if (semi_[u] < semi_[w]) semi_[w] = semi_[u];
      }
      bucket_next_[w] = bucket_head_[semi_[w]];
      bucket_head_[semi_[w]] = w;
      const auto parent = dfs_parent_[w];
      ancestor_[w] = parent;
      for (auto v = bucket_head_[parent]; v != kNil; v = bucket_next_[v]) {
        const auto u = eval(v);
        idom_[v] = semi_[u] < semi_[v] ? u : parent;
      }
      bucket_head_[parent] = kNil;
    }
    for (std::int32_t w = 1; w < n; ++w)
      if (idom_[w] != semi_[w]) idom_[w] = idom_[idom_[w]];

    real_count_.assign(static_cast<std::size_t>(n), 0);
    for (std::int32_t w = n - 1; w >= 1; --w) {
      if (is_real(w)) ++real_count_[w];
      real_count_[idom_[w]] += real_count_[w];
    }
  }

  std::vector<std::int32_t> local_of_;
  std::vector<NodeId> global_;
  std::vector<std::int32_t> virtual_k_, virtual_local_, dfs_parent_;
  std::vector<std::pair<std::int32_t, std::size_t>> stack_;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges_;
  std::vector<std::size_t> succ_off_, pred_off_, cursor_;
  std::vector<std::int32_t> succ_, pred_;
  std::vector<std::int32_t> semi_, label_, ancestor_, idom_, bucket_head_, bucket_next_, path_;
  std::vector<std::int64_t> real_count_;
  std::vector<std::int32_t> dist_, queue_;
  std::vector<char> mark_;
  std::int64_t real_nodes_ = 0;
};

// |({a} + up(a)) & ({b} + up(b))|, an upper bound on co-heaviness.
std::int64_t shared_ancestry(const DepGraph& g, NodeId a, NodeId b) {
  auto n = static_cast<std::int64_t>(g.upstream(a).intersection_count(g.upstream(b)));
  if (g.upstream(b).test(a)) ++n;
  if (g.upstream(a).test(b)) ++n;
  return n;
}

PairArgmax best_pair(const DepGraph& g, NodeId p, Workspace& ws,
                     std::span<const std::int64_t> parent_h) {
  PairArgmax out;
  const auto parents = g.parents(p);
  if (parents.size() < 2) return out;
  out.pair = {parents[0], parents[1]};
  for (std::size_t i = 0; i < parents.size(); ++i)
    for (std::size_t j = i + 1; j < parents.size(); ++j) {
      if (shared_ancestry(g, parents[i], parents[j]) <= out.h_co_max) continue;
      const auto s_ab = ws.unreachable_without(ws.virtual_of_parent(i), ws.virtual_of_parent(j));
      const auto co = s_ab - parent_h[i] - parent_h[j];
      if (co > out.h_co_max) {
        out.h_co_max = co;
        out.pair = {parents[i], parents[j]};
      }
    }
  return out;
}

std::optional<double> gini_or_absent(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return gini(v);
}

}  // namespace

UpstreamProfile upstream_profile(const DepGraph& g, NodeId p) {
  if (p >= g.size()) throw NotFoundError("unknown package id " + std::to_string(p));
  Workspace ws(g.size());
  ws.analyze(g, p);
  UpstreamProfile out;
  out.package = p;
  out.n1 = ws.real_nodes() - 1;
  for (std::size_t k = 0; k < g.parents(p).size(); ++k)
    out.parent_h.push_back(ws.dominated(ws.virtual_of_parent(k)));
  for (std::int32_t v = 1; v < ws.size(); ++v)
    if (ws.is_real(v)) out.upstream_h.emplace_back(ws.global(v), ws.dominated(v));
  std::sort(out.upstream_h.begin(), out.upstream_h.end());
  out.depth = ws.max_depth();
  ws.release();
  return out;
}

HeavinessTable HeavinessTable::compute(const DepGraph& g, std::size_t threads) {
  const std::size_t n = g.size();
  HeavinessTable t;
  t.packages_.assign(n, {});
  t.edge_h_.assign(g.strong().edge_count(), 0);
  threads = std::max<std::size_t>(1, std::min(threads, std::max<std::size_t>(1, n / 16)));

  // Per-worker sums of h_u over downstream (all / indirect only).
  std::vector<std::vector<std::int64_t>> hd_sum(threads, std::vector<std::int64_t>(n, 0));
  std::vector<std::vector<std::int64_t>> hid_sum(threads, std::vector<std::int64_t>(n, 0));

  parallel_for(
      n, threads,
      [&](std::size_t worker, std::size_t begin, std::size_t end) {
        Workspace ws(n);
        std::vector<std::int64_t> parent_h;
        std::vector<double> as_double;
        auto& hd = hd_sum[worker];
        auto& hid = hid_sum[worker];
        for (std::size_t i = begin; i < end; ++i) {
          const auto p = static_cast<NodeId>(i);
          ws.analyze(g, p);
          auto& row = t.packages_[p];
          const auto parents = g.parents(p);

          parent_h.clear();
          for (std::size_t k = 0; k < parents.size(); ++k) {
            const auto h = ws.dominated(ws.virtual_of_parent(k));
            parent_h.push_back(h);
            t.edge_h_[*g.strong().edge_index(parents[k], p)] = h;
            if (k == 0 || h > row.mhp.h_max) {
              row.mhp.h_max = h;
              row.mhp.parents = {parents[k]};
            } else if (h == row.mhp.h_max) {
              row.mhp.parents.push_back(parents[k]);
            }
          }

          for (std::int32_t v = 1; v < ws.size(); ++v) {
            if (!ws.is_real(v)) continue;
            const NodeId c = ws.global(v);
            const auto hu = ws.dominated(v);
            hd[c] += hu;
            if (!std::binary_search(parents.begin(), parents.end(), c)) hid[c] += hu;
          }

          row.n_strong = ws.real_nodes() - 1;
          row.k_p = static_cast<std::int64_t>(parents.size());
          row.depth = ws.max_depth();
          row.mcohp = best_pair(g, p, ws, parent_h);
          as_double.assign(parent_h.begin(), parent_h.end());
          row.gini_from_parents = gini_or_absent(as_double);
          ws.release();
        }
      },
      16);

  for (std::size_t w = 1; w < threads; ++w)
    for (std::size_t v = 0; v < n; ++v) {
      hd_sum[0][v] += hd_sum[w][v];
      hid_sum[0][v] += hid_sum[w][v];
    }

  const auto edges = g.strong().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto& row = t.packages_[edges[e].parent];
    row.hc.sum += t.edge_h_[e];
    ++row.hc.count;
  }
  std::vector<double> child_h;
  for (NodeId v = 0; v < n; ++v) {
    auto& row = t.packages_[v];
    row.k_c = static_cast<std::int64_t>(g.children(v).size());
    row.k_d = static_cast<std::int64_t>(g.downstream(v).count());
    row.k_id = row.k_d - row.k_c;
    row.hd = {hd_sum[0][v], row.k_d};
    row.hid = {hid_sum[0][v], row.k_id};
    row.total_downstream = hd_sum[0][v];
    child_h.clear();
    for (NodeId c : g.children(v)) child_h.push_back(static_cast<double>(t.edge_h_[*g.strong().edge_index(v, c)]));
    row.gini_on_children = gini_or_absent(child_h);
  }
  return t;
}

}  // namespace depheavy
