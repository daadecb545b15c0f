#include "odescm/digraph.hpp"

#include <algorithm>

#include "odescm/errors.hpp"

namespace odescm {

Digraph Digraph::from_parents(std::vector<std::string> nodes, const std::vector<std::vector<std::size_t>>& parents) {
  if (parents.size() != nodes.size()) throw InvalidArgument("one parent set per node required");
  Digraph g;
  g.nodes = std::move(nodes);
  g.self_loops.assign(g.nodes.size(), false);
  for (std::size_t i = 0; i < parents.size(); ++i) {
    for (std::size_t j : parents[i]) {
      if (j >= g.nodes.size()) throw InvalidArgument("parent index out of range");
      if (j == i) {
        g.self_loops[i] = true;
      } else {
        g.edges.emplace_back(j, i);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(from, to));
}

bool Digraph::any_self_loop() const {
  return std::any_of(self_loops.begin(), self_loops.end(), [](bool b) { return b; });
}

namespace {

std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_dot(const Digraph& g, std::string_view name) {
  std::vector<std::pair<std::size_t, std::size_t>> all = g.edges;
  for (std::size_t i = 0; i < g.self_loops.size(); ++i) {
    if (g.self_loops[i]) all.emplace_back(i, i);
  }
  std::sort(all.begin(), all.end());
  std::string out = "digraph " + quoted(name) + " {\n";
  for (const auto& n : g.nodes) out += "  " + quoted(n) + ";\n";
  for (const auto& [from, to] : all) {
    out += "  " + quoted(g.nodes[from]) + " -> " + quoted(g.nodes[to]) + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace odescm
