#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "depheavy/graph.hpp"

namespace depheavy {

struct WeightedEdge {
  Edge edge;  // global ids
  std::int64_t h = 0;
  double betweenness = 0.0;
};

/// Edge-induced subgraph of a DepGraph's strong edges.
struct Subgraph {
  std::vector<NodeId> nodes;         // ascending global ids
  std::vector<WeightedEdge> edges;   // ascending by edge

  /// Same graph over local ids (index into `nodes`).
  Digraph local() const;
  std::optional<std::size_t> local_id(NodeId global) const;
};

struct CoreGraph {
  Subgraph graph;
  std::int64_t h_threshold = 30;
  std::int64_t h_retained = 0;
  std::int64_t h_total = 0;
  double flow_fraction() const { return h_total ? static_cast<double>(h_retained) / h_total : 0.0; }
};

/// Strong edges with h >= threshold and their endpoints. `edge_h` is
/// aligned with g.strong().edges(). Betweenness is filled in over the
/// retained subgraph.
CoreGraph core_graph(const DepGraph& g, std::span<const std::int64_t> edge_h,
                     std::int64_t h_threshold = 30);

/// Weakly connected component sizes, descending.
std::vector<std::size_t> components(const Subgraph& sg);

/// Directed, unweighted edge betweenness with fractional credit split over
/// equal-length shortest paths, summed over ordered reachable pairs.
/// Aligned with g.edges(). Output does not depend on `threads`.
std::vector<double> edge_betweenness(const Digraph& g, std::size_t threads = 1);

struct KeyPaths {
  Subgraph graph;
  double bt_threshold = 20;
  double bt_retained = 0;
  double bt_total = 0;
  double flow_fraction() const { return bt_total > 0 ? bt_retained / bt_total : 0.0; }
};

/// Edges of the core graph with betweenness >= threshold.
KeyPaths key_paths(const CoreGraph& core, double bt_threshold = 20);

/// Longest shortest-path distance from p to a reachable node with no
/// out-edges; 0 when p has none.
std::size_t transmission_length(const Digraph& g, NodeId p);
std::size_t transmission_length(const DepGraph& g, NodeId p);

struct PairRelation {
  enum class Kind { ParentChild, UpstreamDownstream, CommonUpstream, NoClearRelation };
  Kind kind = Kind::NoClearRelation;
  std::optional<NodeId> witness;  // set for CommonUpstream
};

std::string_view to_string(PairRelation::Kind kind);

/// How two strong parents a, b of p relate. CommonUpstream picks the
/// smallest-named shared upstream c with h_u(c->a) and h_u(c->b) both above
/// 0.75 * h_co((a, b) -> p).
PairRelation classify_parent_pair(const DepGraph& g, NodeId a, NodeId b, NodeId p);

struct SourceScore {
  std::int64_t s = 0;
  std::int64_t via_parent = 0;       // heaviness a sends downstream through p
  std::int64_t via_mhp_parent = 0;   // same for a's heaviest parent
  std::optional<NodeId> mhp_parent;
};

/// Whether a -> p is where heaviness flowing below p originates rather than
/// being inherited from a's own heaviest parent. DomainError unless a is a
/// strong parent of p.
SourceScore source_score(const DepGraph& g, NodeId a, NodeId p);

}  // namespace depheavy
