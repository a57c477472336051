#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbandits {

using NodeId = int;

// Node sets are bitmasks over node ids; graphs here stay well under 32 nodes.
using NodeSet = std::uint32_t;

inline bool contains(NodeSet s, NodeId v) { return (s >> v) & 1u; }
inline int set_size(NodeSet s) { return std::popcount(s); }
inline NodeSet single(NodeId v) { return NodeSet{1} << v; }

inline std::vector<NodeId> set_nodes(NodeSet s) {
  std::vector<NodeId> out;
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

/// Directed acyclic graph over system nodes plus context (intervention)
/// nodes. Context nodes are exogenous: no incoming edges. One non-context
/// node is the target.
struct Dag {
  std::vector<std::string> names;
  std::vector<NodeSet> parents;   // parents[v] = bitmask of parents of v
  std::vector<NodeSet> children;  // children[v] = bitmask of children of v
  NodeSet context = 0;            // the set I
  NodeId target = -1;             // Y

  int node_count() const { return static_cast<int>(names.size()); }

  NodeSet all_nodes() const {
    int n = node_count();
    return n >= 32 ? ~NodeSet{0} : (NodeSet{1} << n) - 1;
  }
  NodeSet system_nodes() const { return all_nodes() & ~context; }

  void add_node(std::string name) {
    names.push_back(std::move(name));
    parents.push_back(0);
    children.push_back(0);
  }

  void add_edge(NodeId from, NodeId to) {
    parents[to] |= single(from);
    children[from] |= single(to);
  }

  bool has_edge(NodeId from, NodeId to) const { return contains(children[from], to); }

  NodeId node_by_name(const std::string& name) const {
    for (int v = 0; v < node_count(); ++v)
      if (names[v] == name) return v;
    throw std::invalid_argument("unknown node name: " + name);
  }

  void validate() const {
    if (node_count() > 31) throw std::invalid_argument("Dag: too many nodes for bitmask sets");
    if (target < 0 || target >= node_count()) throw std::invalid_argument("Dag: missing target");
    if (contains(context, target)) throw std::invalid_argument("Dag: target is a context node");
    for (NodeId v : set_nodes(context))
      if (parents[v] != 0) throw std::invalid_argument("Dag: context node has incoming edges");
    topological_order(*this);  // throws on cycles
  }

  /// Ancestors of every node in `s`, including `s` itself.
  NodeSet ancestors_of(NodeSet s) const {
    NodeSet anc = s;
    bool grew = true;
    while (grew) {
      grew = false;
      for (NodeId v : set_nodes(anc)) {
        NodeSet add = parents[v] & ~anc;
        if (add) {
          anc |= add;
          grew = true;
        }
      }
    }
    return anc;
  }

  friend std::vector<NodeId> topological_order(const Dag& g);
};

/// Parent-before-child order, deterministic: ties broken by node id.
inline std::vector<NodeId> topological_order(const Dag& g) {
  int n = g.node_count();
  std::vector<int> indeg(n);
  for (int v = 0; v < n; ++v) indeg[v] = set_size(g.parents[v]);
  std::vector<NodeId> order;
  order.reserve(n);
  NodeSet ready = 0;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) ready |= single(v);
  while (ready) {
    NodeId v = std::countr_zero(ready);  // lowest id first
    ready &= ready - 1;
    order.push_back(v);
    for (NodeId c : set_nodes(g.children[v]))
      if (--indeg[c] == 0) ready |= single(c);
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("topological_order: graph has a cycle");
  return order;
}

/// d-separation of a and b given c, by the standard reachability
/// formulation over (node, direction) states.
inline bool d_separated(const Dag& g, NodeSet a, NodeSet b, NodeSet c) {
  if ((a & b) || (a & c) || (b & c))
    throw std::invalid_argument("d_separated: a, b, c must be disjoint");
  if (a == 0 || b == 0) return true;
  NodeSet anc_c = c ? g.ancestors_of(c) : 0;

  // State (v, dir): dir=0 the trail left v upward (arrived from a child),
  // dir=1 it arrived from a parent.
  std::vector<std::pair<NodeId, int>> stack;
  NodeSet seen_up = 0, seen_down = 0;
  for (NodeId v : set_nodes(a)) stack.push_back({v, 0});
  while (!stack.empty()) {
    auto [v, dir] = stack.back();
    stack.pop_back();
    NodeSet& seen = dir == 0 ? seen_up : seen_down;
    if (contains(seen, v)) continue;
    seen |= single(v);
    if (!contains(c, v) && contains(b, v)) return false;
    if (dir == 0) {
      if (!contains(c, v)) {
        for (NodeId p : set_nodes(g.parents[v])) stack.push_back({p, 0});
        for (NodeId ch : set_nodes(g.children[v])) stack.push_back({ch, 1});
      }
    } else {
      if (!contains(c, v))
        for (NodeId ch : set_nodes(g.children[v])) stack.push_back({ch, 1});
      if (contains(anc_c, v))  // collider opened by an ancestor of c
        for (NodeId p : set_nodes(g.parents[v])) stack.push_back({p, 0});
    }
  }
  return true;
}

/// All S subseteq system nodes minus the target with |S| <= max_size and
/// I d-separated from Y by S. Ordered by size, then lexicographically by
/// the sorted node lists.
inline std::vector<NodeSet> oracle_separating_sets(const Dag& g, int max_size) {
  NodeSet pool = g.system_nodes() & ~single(g.target);
  std::vector<NodeId> nodes = set_nodes(pool);
  std::vector<NodeSet> found;
  for (std::uint32_t sub = 0; sub < (1u << nodes.size()); ++sub) {
    if (std::popcount(sub) > max_size) continue;
    NodeSet s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if ((sub >> i) & 1u) s |= single(nodes[i]);
    if (d_separated(g, g.context, single(g.target), s)) found.push_back(s);
  }
  std::sort(found.begin(), found.end(), [](NodeSet x, NodeSet y) {
    if (set_size(x) != set_size(y)) return set_size(x) < set_size(y);
    return set_nodes(x) < set_nodes(y);
  });
  return found;
}

// ---------------------------------------------------------------------------
// Text format. One line per edge "parent->child", plus headers:
//   nodes: <name> ...      (optional; declares node order, covers isolated nodes)
//   context: <name> ...
//   target: <name>
// '#' starts a comment. Nodes not declared are created in order of first use.

inline Dag parse_graph_text(const std::string& text) {
  Dag g;
  std::map<std::string, NodeId> ids;
  auto intern = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    NodeId v = g.node_count();
    g.add_node(name);
    ids.emplace(name, v);
    return v;
  };
  std::vector<std::pair<std::string, std::string>> pending_edges;
  std::vector<std::string> ctx_names;
  std::string target_name;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "nodes:") {
      std::string name;
      while (ls >> name) intern(name);
    } else if (tok == "context:") {
      std::string name;
      while (ls >> name) ctx_names.push_back(name);
    } else if (tok == "target:") {
      if (!(ls >> target_name)) throw std::invalid_argument("graph text: empty target line");
    } else {
      auto arrow = tok.find("->");
      if (arrow == std::string::npos)
        throw std::invalid_argument("graph text: expected 'parent->child', got: " + tok);
      pending_edges.emplace_back(tok.substr(0, arrow), tok.substr(arrow + 2));
    }
  }
  for (auto& [p, c] : pending_edges) g.add_edge(intern(p), intern(c));
  for (auto& name : ctx_names) g.context |= single(g.node_by_name(name));
  if (target_name.empty()) throw std::invalid_argument("graph text: missing target line");
  g.target = g.node_by_name(target_name);
  g.validate();
  return g;
}

inline std::string to_graph_text(const Dag& g) {
  std::ostringstream out;
  out << "nodes:";
  for (const auto& n : g.names) out << ' ' << n;
  out << '\n';
  if (g.context) {
    out << "context:";
    for (NodeId v : set_nodes(g.context)) out << ' ' << g.names[v];
    out << '\n';
  }
  out << "target: " << g.names[g.target] << '\n';
  for (NodeId v = 0; v < g.node_count(); ++v)
    for (NodeId c : set_nodes(g.children[v]))
      out << g.names[v] << "->" << g.names[c] << '\n';
  return out.str();
}

}  // namespace cbandits
