#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace odescm {

/// Directed graph over named nodes. Self-loops are kept apart from the edge
/// list as a per-node flag.
struct Digraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (from, to), sorted, from != to
  std::vector<bool> self_loops;

  /// Graph with an edge j -> i for every j in parents[i], j != i, and a
  /// self-loop on i when i is its own parent.
  static Digraph from_parents(std::vector<std::string> nodes, const std::vector<std::vector<std::size_t>>& parents);

  bool has_edge(std::size_t from, std::size_t to) const;
  bool has_self_loop(std::size_t node) const { return self_loops.at(node); }
  bool any_self_loop() const;

  friend bool operator==(const Digraph&, const Digraph&) = default;
};

/// Graphviz rendering with nodes in index order and edges (self-loops
/// included) sorted by (from, to).
std::string to_dot(const Digraph& g, std::string_view name = "G");

}  // namespace odescm
