#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace koopnet {

/// Directed graph over subsystems 0..s-1. Arcs are ordered pairs of distinct
/// vertices; self-loops are rejected. Immutable after construction.
/// External I/O (JSON configs, reports) is 1-based; this class is 0-based.
class Digraph {
 public:
  Digraph() = default;
  Digraph(int num_vertices, std::vector<std::pair<int, int>> arcs);

  int num_vertices() const { return num_vertices_; }
  const std::vector<std::pair<int, int>>& arcs() const { return arcs_; }

  /// Tails of arcs ending at v (the subsystems feeding v), ascending.
  const std::vector<int>& in_neighbours(int v) const { return in_[v]; }
  /// Heads of arcs starting at v, ascending.
  const std::vector<int>& out_neighbours(int v) const { return out_[v]; }

  bool has_arc(int tail, int head) const;

 private:
  int num_vertices_ = 0;
  std::vector<std::pair<int, int>> arcs_;
  std::vector<std::vector<int>> in_, out_;
};

/// Acyclic quotient of a digraph over its strong components.
struct Condensation {
  std::vector<std::vector<int>> components;  // partition of [0:s), each ascending
  std::vector<int> component_index;          // vertex -> component
  Digraph condensed;                         // vertices are component indices
  std::vector<int> topo_order;               // topological sort of `condensed`

  bool trivial(int k) const { return components[k].size() == 1; }
};

/// Kahn's algorithm; ties broken by smallest vertex index. Returns an order in
/// which every arc's tail precedes its head, or nullopt if a cycle exists
/// (a legal outcome, not an error).
std::optional<std::vector<int>> topological_sort(const Digraph& g);

/// Maximal mutually-reachable vertex sets (Tarjan). Components are sorted by
/// their smallest vertex; vertices within a component ascend.
std::vector<std::vector<int>> strong_components(const Digraph& g);

Condensation condensation(const Digraph& g);

/// True iff some vertex lies on two distinct directed cycles. Equivalently
/// (for the complement): every non-trivial strong component is a single
/// directed cycle, i.e. each of its vertices has exactly one in- and one
/// out-neighbour inside the component.
bool has_vertex_shared_by_cycles(const Digraph& g);

}  // namespace koopnet
