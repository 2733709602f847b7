#pragma once

// Named test graphs and random generators.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "depheavy/graph.hpp"

namespace fixtures {

using NamePairs = std::vector<std::pair<std::string, std::string>>;  // (parent, child)

struct NamedGraph {
  std::vector<std::string> names;
  NamePairs strong;
  NamePairs weak;

  depheavy::DepGraph build(std::size_t threads = 1) const {
    return depheavy::DepGraph::from_edges(names, strong, weak, threads);
  }
};

// P <- A, P <- B, A <- C, A <- D, B <- C, C <- E
inline NamedGraph g1() {
  return {{"P", "A", "B", "C", "D", "E"},
          {{"A", "P"}, {"B", "P"}, {"C", "A"}, {"D", "A"}, {"C", "B"}, {"E", "C"}},
          {}};
}

// G1 plus P -> Q.
inline NamedGraph g2() {
  auto g = g1();
  g.names.push_back("Q");
  g.strong.push_back({"P", "Q"});
  return g;
}

// Nine upstream packages of P; A alone brings A, X1, X2, while S is shared
// with B's side.
inline NamedGraph fig3() {
  return {{"P", "A", "B", "X1", "X2", "S", "Y1", "Y2", "Y3", "Y4"},
          {{"A", "P"},
           {"B", "P"},
           {"X1", "A"},
           {"X2", "X1"},
           {"S", "A"},
           {"S", "B"},
           {"Y1", "B"},
           {"Y2", "Y1"},
           {"Y3", "B"},
           {"Y4", "Y3"}},
          {}};
}

inline std::string node_name(std::size_t i) {
  std::string s = "n";
  if (i < 10) s += '0';
  return s + std::to_string(i);
}

// Random DAG with node names shuffled against the topological order, so
// ids and topological positions differ. A few weak edges are added.
inline NamedGraph random_dag(std::uint64_t seed, std::size_t max_nodes = 40,
                             std::size_t max_edges = 120) {
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);

  NamedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.names.push_back(node_name(i));
  const std::size_t possible = n * (n - 1) / 2;
  const std::size_t m =
      std::uniform_int_distribution<std::size_t>(0, std::min(max_edges, possible))(rng);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (seen.size() < m) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second)
      g.strong.push_back({node_name(label[a]), node_name(label[b])});
  }
  for (int k = 0; k < 5 && n > 1; ++k) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.count({a, b})) g.weak.push_back({node_name(label[a]), node_name(label[b])});
  }
  return g;
}

// Random digraph, cycles allowed.
inline NamedGraph random_digraph(std::uint64_t seed, std::size_t max_nodes, double density) {
  std::mt19937_64 rng(seed);
  const std::size_t n = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
  NamedGraph g;
  for (std::size_t i = 0; i < n; ++i) g.names.push_back(node_name(i));
  std::bernoulli_distribution coin(density);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && coin(rng)) g.strong.push_back({node_name(a), node_name(b)});
  return g;
}

}  // namespace fixtures
