#pragma once

// Dependency heaviness metrics on a DepGraph.
//
// Per-query operations below work directly on the strong graph with
// virtual edge removal (BFS over the parents of the queried package).
// HeavinessTable (further down) computes the same quantities for every
// package at once using dominator trees; the two routes are checked
// against each other and against a naive set oracle in the tests.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "depheavy/graph.hpp"

namespace depheavy {

/// Mean kept as an exact integer sum over a count; divided only when
/// presented. count == 0 reads as 0 and is rendered as absent.
struct Mean {
  std::int64_t sum = 0;
  std::int64_t count = 0;

  double value() const noexcept { return count ? static_cast<double>(sum) / count : 0.0; }
  bool present() const noexcept { return count > 0; }
  bool operator==(const Mean&) const = default;
};

struct EdgeHeaviness {
  NodeId parent = 0;
  NodeId child = 0;
  std::int64_t n1 = 0;  // strong dependencies of child
  std::int64_t n2 = 0;  // after demoting parent to a weak parent
  std::int64_t h = 0;   // n1 - n2
};

struct ParentArgmax {
  std::int64_t h_max = 0;
  std::vector<NodeId> parents;  // all tied maximizers, ascending
};

struct DownstreamHeaviness {
  Mean hd;   // over downstream
  Mean hid;  // over indirect downstream
  std::int64_t k_d = 0;
  std::int64_t k_id = 0;
};

struct CoHeaviness {
  NodeId parent_a = 0, parent_b = 0, child = 0;
  std::int64_t s_a_size = 0, s_b_size = 0, s_ab_size = 0;
  std::int64_t h_co = 0;
};

struct PairArgmax {
  std::int64_t h_co_max = 0;
  std::optional<std::pair<NodeId, NodeId>> pair;  // first < second
};

struct WhatIf {
  std::int64_t old_count = 0;
  std::int64_t new_count = 0;
  std::vector<NodeId> reduced;  // ascending
};

EdgeHeaviness edge_heaviness(const DepGraph& g, NodeId parent, NodeId child);

/// Upstream growth of `child` if the weak parent were promoted to strong.
std::int64_t weak_parent_heaviness(const DepGraph& g, NodeId weak_parent, NodeId child);

ParentArgmax max_heaviness_from_parents(const DepGraph& g, NodeId p);

/// h_u: upstream loss of p when every strong out-edge of c is removed.
/// DomainError unless c is upstream of p.
std::int64_t heaviness_from_upstream(const DepGraph& g, NodeId c, NodeId p);

/// Mean heaviness of p on its children; absent (count 0) without children.
Mean heaviness_on_children(const DepGraph& g, NodeId p);

DownstreamHeaviness heaviness_on_downstream(const DepGraph& g, NodeId p);

/// Sum of h_u(p -> b) over downstream b (= h_d * K_d exactly).
std::int64_t total_downstream_heaviness(const DepGraph& g, NodeId p);

/// Dependencies of p removable only by demoting a and b together. Throws
/// DomainError if a == b or either is not a strong parent of p, and
/// std::logic_error if S_a and S_b ever overlap.
CoHeaviness co_heaviness(const DepGraph& g, NodeId a, NodeId b, NodeId p);

/// Maximum co-heaviness over unordered parent pairs; ties go to the
/// lexicographically smallest pair. Pairs whose inclusive upstream
/// closures are disjoint are skipped (their co-heaviness is 0).
PairArgmax max_co_heaviness(const DepGraph& g, NodeId p);

/// Gini index sum_i sum_j |x_i - x_j| / (2 n^2 mean). 0 for n = 1 or an
/// all-zero input; DomainError on empty input.
double gini(std::span<const double> values);

/// Demote every listed parent of p to a weak parent and report what p
/// loses. DomainError listing any non-parents.
WhatIf whatif_demote(const DepGraph& g, NodeId p, std::span<const NodeId> parents);

// ------------------------------------------------------ whole-ecosystem

/// Heaviness profile of a single package, from the dominator tree of its
/// upstream subgraph (reverse edges, rooted at the package).
struct UpstreamProfile {
  NodeId package = 0;
  std::int64_t n1 = 0;
  /// h of each strong in-edge, aligned with g.parents(package).
  std::vector<std::int64_t> parent_h;
  /// (c, h_u(c -> package)) for every upstream c, ascending by c.
  std::vector<std::pair<NodeId, std::int64_t>> upstream_h;
  /// Longest shortest distance from an upstream package.
  std::int64_t depth = 0;
};

UpstreamProfile upstream_profile(const DepGraph& g, NodeId p);

struct PackageHeaviness {
  std::int64_t n_strong = 0;
  std::int64_t k_p = 0, k_c = 0, k_d = 0, k_id = 0;
  ParentArgmax mhp;
  PairArgmax mcohp;
  Mean hc, hd, hid;
  std::int64_t total_downstream = 0;
  std::optional<double> gini_from_parents;  // absent when k_p == 0
  std::optional<double> gini_on_children;   // absent when k_c == 0
  std::int64_t depth = 0;
};

/// Every package's heaviness metrics plus h for every strong edge.
class HeavinessTable {
 public:
  static HeavinessTable compute(const DepGraph& g, std::size_t threads = 1);

  const std::vector<PackageHeaviness>& packages() const noexcept { return packages_; }
  const PackageHeaviness& operator[](NodeId v) const { return packages_[v]; }
  /// Aligned with g.strong().edges().
  const std::vector<std::int64_t>& edge_h() const noexcept { return edge_h_; }

 private:
  std::vector<PackageHeaviness> packages_;
  std::vector<std::int64_t> edge_h_;
};

}  // namespace depheavy
