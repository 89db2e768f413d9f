#include "koopnet/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace koopnet {

Digraph::Digraph(int num_vertices, std::vector<std::pair<int, int>> arcs)
    : num_vertices_(num_vertices), arcs_(std::move(arcs)) {
  if (num_vertices_ < 0) throw std::invalid_argument("Digraph: negative vertex count");
  in_.resize(num_vertices_);
  out_.resize(num_vertices_);
  std::set<std::pair<int, int>> seen;
  for (auto [tail, head] : arcs_) {
    if (tail < 0 || tail >= num_vertices_ || head < 0 || head >= num_vertices_)
      throw std::invalid_argument("Digraph: arc endpoint out of range");
    if (tail == head)
      throw std::invalid_argument("Digraph: self-loop at vertex " + std::to_string(tail));
    if (!seen.insert({tail, head}).second)
      throw std::invalid_argument("Digraph: duplicate arc");
    out_[tail].push_back(head);
    in_[head].push_back(tail);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  for (auto& v : out_) std::sort(v.begin(), v.end());
  std::sort(arcs_.begin(), arcs_.end());
}

bool Digraph::has_arc(int tail, int head) const {
  const auto& o = out_[tail];
  return std::binary_search(o.begin(), o.end(), head);
}

std::optional<std::vector<int>> topological_sort(const Digraph& g) {
  const int s = g.num_vertices();
  std::vector<int> indeg(s, 0);
  for (auto [tail, head] : g.arcs()) {
    (void)tail;
    ++indeg[head];
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < s; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<int> order;
  order.reserve(s);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : g.out_neighbours(v))
      if (--indeg[w] == 0) ready.push(w);
  }
  if (static_cast<int>(order.size()) != s) return std::nullopt;
  return order;
}

namespace {

// Iterative Tarjan; recursion would overflow on adversarial inputs.
struct TarjanState {
  const Digraph& g;
  std::vector<int> index, lowlink, stack;
  std::vector<bool> on_stack;
  std::vector<std::vector<int>> components;
  int next_index = 0;

  explicit TarjanState(const Digraph& graph)
      : g(graph),
        index(graph.num_vertices(), -1),
        lowlink(graph.num_vertices(), 0),
        on_stack(graph.num_vertices(), false) {}

  void run(int root) {
    struct Frame {
      int v;
      std::size_t child;
    };
    std::vector<Frame> frames{{root, 0}};
    enter(root);
    while (!frames.empty()) {
      auto& [v, child] = frames.back();
      const auto& out = g.out_neighbours(v);
      if (child < out.size()) {
        int w = out[child++];
        if (index[w] < 0) {
          enter(w);
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        if (lowlink[v] == index[v]) pop_component(v);
        frames.pop_back();
        if (!frames.empty()) {
          int parent = frames.back().v;
          lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
        }
      }
    }
  }

  void enter(int v) {
    index[v] = lowlink[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
  }

  void pop_component(int v) {
    std::vector<int> comp;
    int w;
    do {
      w = stack.back();
      stack.pop_back();
      on_stack[w] = false;
      comp.push_back(w);
    } while (w != v);
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
};

}  // namespace

std::vector<std::vector<int>> strong_components(const Digraph& g) {
  TarjanState state(g);
  for (int v = 0; v < g.num_vertices(); ++v)
    if (state.index[v] < 0) state.run(v);
  std::sort(state.components.begin(), state.components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return state.components;
}

Condensation condensation(const Digraph& g) {
  Condensation c;
  c.components = strong_components(g);
  c.component_index.assign(g.num_vertices(), -1);
  for (int k = 0; k < static_cast<int>(c.components.size()); ++k)
    for (int v : c.components[k]) c.component_index[v] = k;

  std::set<std::pair<int, int>> condensed_arcs;
  for (auto [tail, head] : g.arcs()) {
    int a = c.component_index[tail], b = c.component_index[head];
    if (a != b) condensed_arcs.insert({a, b});
  }
  c.condensed = Digraph(static_cast<int>(c.components.size()),
                        {condensed_arcs.begin(), condensed_arcs.end()});
  auto order = topological_sort(c.condensed);
  if (!order) throw std::logic_error("condensation: quotient graph has a cycle");
  c.topo_order = *order;
  return c;
}

bool has_vertex_shared_by_cycles(const Digraph& g) {
  // A vertex on two distinct cycles would sit in a strong component that is
  // not a bare cycle. So it suffices to find a non-trivial component where
  // some vertex has in- or out-degree other than one within the component.
  auto comps = strong_components(g);
  for (const auto& comp : comps) {
    if (comp.size() < 2) continue;
    std::vector<bool> member(g.num_vertices(), false);
    for (int v : comp) member[v] = true;
    for (int v : comp) {
      int in = 0, out = 0;
      for (int w : g.in_neighbours(v)) in += member[w];
      for (int w : g.out_neighbours(v)) out += member[w];
      if (in != 1 || out != 1) return true;
    }
  }
  return false;
}

}  // namespace koopnet
