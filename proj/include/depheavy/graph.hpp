#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depheavy/bitset.hpp"
#include "depheavy/metadata.hpp"

namespace depheavy {

using NodeId = std::uint32_t;

/// Directed edge parent -> child ("parent is required by child").
struct Edge {
  NodeId parent = 0;
  NodeId child = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Compressed adjacency over dense node ids with both directions stored.
/// Edges are deduplicated and kept sorted by (parent, child); neighbour
/// lists are sorted ascending.
class Digraph {
 public:
  Digraph() = default;
  /// Self-edges and duplicates are dropped.
  Digraph(std::size_t node_count, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const NodeId> children(NodeId v) const noexcept {
    return {out_targets_.data() + out_offsets_[v], out_targets_.data() + out_offsets_[v + 1]};
  }
  std::span<const NodeId> parents(NodeId v) const noexcept {
    return {in_sources_.data() + in_offsets_[v], in_sources_.data() + in_offsets_[v + 1]};
  }
  /// Index in edges() of the first out-edge of v; out-edges of v are
  /// contiguous and ordered like children(v).
  std::size_t first_out_edge(NodeId v) const noexcept { return out_offsets_[v]; }
  /// Position of parent->child in edges(), if present.
  std::optional<std::size_t> edge_index(NodeId parent, NodeId child) const noexcept;
  bool has_edge(NodeId parent, NodeId child) const noexcept {
    return edge_index(parent, child).has_value();
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<NodeId> out_targets_, in_sources_;
};

/// Immutable package dependency graph: dense ids assigned in sorted name
/// order, strong and weak relations in separate edge sets, and the
/// strong-edge reachability index built once at construction.
class DepGraph {
 public:
  DepGraph() = default;

  /// Strong edge for each non-external Depends/Imports/LinkingTo
  /// declaration, weak edge for Suggests/Enhances. Strong wins when both are
  /// declared for one pair. Packages named in db.excluded_names are skipped.
  static DepGraph build(const PackageDatabase& db, std::size_t threads = 1);

  /// Builds from explicit edges over `names` (any order; ids are reassigned
  /// by sorted name). Repositories default to Other("").
  static DepGraph from_edges(std::vector<std::string> names,
                             const std::vector<std::pair<std::string, std::string>>& strong,
                             const std::vector<std::pair<std::string, std::string>>& weak = {},
                             std::size_t threads = 1);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(NodeId v) const { return names_[v]; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Repository& repository(NodeId v) const { return repositories_[v]; }

  std::optional<NodeId> find(std::string_view name) const;
  /// Throws NotFoundError for unknown names.
  NodeId id(std::string_view name) const;

  const Digraph& strong() const noexcept { return strong_; }
  const Digraph& weak() const noexcept { return weak_; }

  std::span<const NodeId> parents(NodeId v) const noexcept { return strong_.parents(v); }
  std::span<const NodeId> children(NodeId v) const noexcept { return strong_.children(v); }

  /// Strong-edge closures, excluding the node itself.
  const Bitset& upstream(NodeId v) const { return upstream_[v]; }
  const Bitset& downstream(NodeId v) const { return downstream_[v]; }

  /// Strongly connected components of size > 1 in the strong graph
  /// (dependency cycles), each sorted ascending.
  const std::vector<std::vector<NodeId>>& strong_cycles() const noexcept { return cycles_; }

 private:
  void finalize(std::size_t threads);

  std::vector<std::string> names_;
  std::vector<Repository> repositories_;
  std::unordered_map<std::string, NodeId> index_;
  Digraph strong_, weak_;
  std::vector<Bitset> upstream_, downstream_;
  std::vector<std::vector<NodeId>> cycles_;
};

enum class DependencyCategory {
  parents,
  weak_parents,
  strong_dependencies,
  children,
  downstream,
  indirect_downstream,
};

std::optional<DependencyCategory> dependency_category_from_string(std::string_view s);

/// Members of the category, ascending by id (= by name).
std::vector<NodeId> dependency_query(const DepGraph& g, NodeId p, DependencyCategory category);

std::size_t strong_dep_count(const DepGraph& g, NodeId p);

/// Upstream closure of p over the strong edges not in `removed_edges`.
/// Every removed edge must exist (NotFoundError otherwise); g is not
/// modified.
Bitset reach_without(const DepGraph& g, NodeId p, std::span<const Edge> removed_edges);

/// Upstream closure of p, skipping every strong edge for which
/// `removed(edge)` is true. No validation.
Bitset reach_without_if(const DepGraph& g, NodeId p,
                        const std::function<bool(const Edge&)>& removed);

/// Shortest directed path length a -> b over strong edges; nullopt when
/// b is unreachable.
std::optional<std::size_t> distance(const DepGraph& g, NodeId a, NodeId b);

/// Maximum distance from any upstream package to p; 0 with no upstream.
std::size_t depth(const DepGraph& g, NodeId p);

/// BFS distances from `source` following children (forward) or parents.
/// Unreached nodes hold kUnreachable.
inline constexpr std::uint32_t kUnreachable = ~std::uint32_t{0};
std::vector<std::uint32_t> bfs_distances(const Digraph& g, NodeId source, bool forward);

}  // namespace depheavy
