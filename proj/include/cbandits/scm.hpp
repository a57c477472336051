#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/rng.hpp"

namespace cbandits {

/// One bandit action: a value for every context variable, in ascending
/// context-node order. kObserve means "do not intervene".
struct Arm {
  static constexpr std::int8_t kObserve = -1;
  std::vector<std::int8_t> ctx;
  int index = -1;  // ordinal in the environment's arm list

  bool intervenes(std::size_t slot) const { return ctx[slot] != kObserve; }
};

/// Conditional probability table over the node's system parents,
/// ascending parent order, first parent most significant (the last
/// parent varies fastest across rows).
struct Cpt {
  std::vector<NodeId> parents;
  std::vector<int> parent_domains;
  int domain = 2;
  std::vector<double> probs;  // rows * domain, row-major

  int rows() const {
    int r = 1;
    for (int d : parent_domains) r *= d;
    return r;
  }
  const double* row(int r) const { return probs.data() + static_cast<std::size_t>(r) * domain; }
};

// Value-tuple indexing shared by the dataset, the estimators and the exact
// computations: nodes ascending, first node most significant.
inline int cell_count(const std::vector<int>& domains, NodeSet vars) {
  int n = 1;
  for (NodeId v : set_nodes(vars)) n *= domains[v];
  return n;
}

inline int cell_index(const std::vector<int>& domains, NodeSet vars,
                      const std::vector<std::uint8_t>& values) {
  int idx = 0;
  for (NodeId v : set_nodes(vars)) idx = idx * domains[v] + values[v];
  return idx;
}

/// Decode a cell index back to per-node values (only positions in `vars`
/// are meaningful).
inline std::vector<std::uint8_t> cell_values(const std::vector<int>& domains, NodeSet vars,
                                             int index) {
  std::vector<NodeId> nodes = set_nodes(vars);
  std::vector<std::uint8_t> out(domains.size(), 0);
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    out[*it] = static_cast<std::uint8_t>(index % domains[*it]);
    index /= domains[*it];
  }
  return out;
}

/// Discrete SCM with perfect-intervention override semantics. Context
/// nodes carry no CPT; a non-observe context value pins every child of
/// that context node.
struct DiscreteScm {
  Dag graph;
  std::vector<int> domain;  // per node; 0 for context nodes
  std::vector<Cpt> cpt;     // per node; empty for context nodes
  std::vector<NodeId> system_topo;
  std::vector<NodeId> context_nodes;  // ascending

  static constexpr std::uint64_t kStateSpaceCap = 1u << 20;

  void finalize() {
    graph.validate();
    context_nodes = set_nodes(graph.context);
    system_topo.clear();
    for (NodeId v : topological_order(graph))
      if (!contains(graph.context, v)) system_topo.push_back(v);
    for (NodeId v : system_topo) {
      const Cpt& t = cpt[v];
      if (static_cast<int>(t.probs.size()) != t.rows() * t.domain)
        throw std::invalid_argument("DiscreteScm: CPT size mismatch at " + graph.names[v]);
      for (int r = 0; r < t.rows(); ++r) {
        double sum = 0;
        for (int k = 0; k < t.domain; ++k) sum += t.row(r)[k];
        if (std::fabs(sum - 1.0) > 1e-9)
          throw std::invalid_argument("DiscreteScm: CPT row does not sum to 1 at " +
                                      graph.names[v]);
      }
    }
    if (domain[graph.target] != 2)
      throw std::invalid_argument("DiscreteScm: target must be binary");
  }

  // Values forced by the arm, or -1. Index by node id.
  std::vector<std::int8_t> pinned_values(const Arm& arm) const {
    std::vector<std::int8_t> pin(graph.node_count(), -1);
    for (std::size_t slot = 0; slot < context_nodes.size(); ++slot) {
      if (!arm.intervenes(slot)) continue;
      for (NodeId child : set_nodes(graph.children[context_nodes[slot]]))
        pin[child] = arm.ctx[slot];
    }
    return pin;
  }

  /// Ancestral sample of all system nodes under the arm's interventions.
  std::vector<std::uint8_t> sample(const Arm& arm, RandomStream& rng) const {
    std::vector<std::int8_t> pin = pinned_values(arm);
    std::vector<std::uint8_t> values(graph.node_count(), 0);
    for (NodeId v : system_topo) {
      if (pin[v] >= 0) {
        values[v] = static_cast<std::uint8_t>(pin[v]);
        continue;
      }
      const Cpt& t = cpt[v];
      int row = 0;
      for (std::size_t i = 0; i < t.parents.size(); ++i)
        row = row * t.parent_domains[i] + values[t.parents[i]];
      const double* p = t.row(row);
      double u = rng.uniform();
      int k = 0;
      double acc = p[0];
      while (k + 1 < t.domain && u >= acc) acc += p[++k];
      values[v] = static_cast<std::uint8_t>(k);
    }
    return values;
  }

  // Walks the factored joint over all system assignments consistent with
  // the arm, calling visit(values, probability) on each.
  template <typename Visit>
  void enumerate_joint(const Arm& arm, Visit&& visit) const {
    std::uint64_t states = 1;
    for (NodeId v : system_topo) {
      states *= static_cast<std::uint64_t>(domain[v]);
      if (states > kStateSpaceCap)
        throw CapacityError("DiscreteScm: joint state space exceeds cap");
    }
    std::vector<std::int8_t> pin = pinned_values(arm);
    std::vector<std::uint8_t> values(graph.node_count(), 0);
    auto rec = [&](auto&& self, std::size_t i, double prob) -> void {
      if (prob == 0.0) return;
      if (i == system_topo.size()) {
        visit(values, prob);
        return;
      }
      NodeId v = system_topo[i];
      if (pin[v] >= 0) {
        values[v] = static_cast<std::uint8_t>(pin[v]);
        self(self, i + 1, prob);
        return;
      }
      const Cpt& t = cpt[v];
      int row = 0;
      for (std::size_t k = 0; k < t.parents.size(); ++k)
        row = row * t.parent_domains[k] + values[t.parents[k]];
      const double* p = t.row(row);
      for (int val = 0; val < t.domain; ++val) {
        values[v] = static_cast<std::uint8_t>(val);
        self(self, i + 1, prob * p[val]);
      }
    };
    rec(rec, 0, 1.0);
  }

  /// Exact E[Y | I = arm].
  double true_mean(const Arm& arm) const {
    double mean = 0.0;
    enumerate_joint(arm, [&](const std::vector<std::uint8_t>& values, double prob) {
      if (values[graph.target] == 1) mean += prob;
    });
    return mean;
  }

  /// Exact (P[S=s | arm], P[Y=1, S=s | arm]) per cell of `s_vars`.
  std::vector<std::pair<double, double>> exact_sepset_distribution(const Arm& arm,
                                                                   NodeSet s_vars) const {
    std::vector<std::pair<double, double>> out(cell_count(domain, s_vars), {0.0, 0.0});
    enumerate_joint(arm, [&](const std::vector<std::uint8_t>& values, double prob) {
      auto& cell = out[cell_index(domain, s_vars, values)];
      cell.first += prob;
      if (values[graph.target] == 1) cell.second += prob;
    });
    return out;
  }
};

/// Environment handed to the harness: the model, its action list, and the
/// exact arm means.
struct BanditEnv {
  std::string name;
  DiscreteScm scm;
  std::vector<Arm> arms;
  std::vector<double> true_means;
  int best_arm = -1;

  double best_mean() const { return true_means[best_arm]; }
};

/// Every assignment of the context variables, value order (observe, 0, 1,
/// ...), first context node most significant. One entry per action.
inline std::vector<Arm> enumerate_arms(const DiscreteScm& scm) {
  std::vector<int> slot_domain;
  for (NodeId c : scm.context_nodes) {
    NodeSet kids = scm.graph.children[c];
    if (!kids) throw std::invalid_argument("enumerate_arms: context node without target");
    slot_domain.push_back(scm.domain[std::countr_zero(kids)]);
  }
  std::size_t total = 1;
  for (int d : slot_domain) total *= static_cast<std::size_t>(d) + 1;
  std::vector<Arm> arms(total);
  for (std::size_t i = 0; i < total; ++i) {
    Arm& a = arms[i];
    a.index = static_cast<int>(i);
    a.ctx.resize(slot_domain.size());
    std::size_t rem = i;
    for (std::size_t slot = slot_domain.size(); slot-- > 0;) {
      std::size_t base = static_cast<std::size_t>(slot_domain[slot]) + 1;
      a.ctx[slot] = static_cast<std::int8_t>(rem % base) - 1;
      rem /= base;
    }
  }
  return arms;
}

inline BanditEnv finish_env(std::string name, DiscreteScm scm) {
  BanditEnv env;
  env.name = std::move(name);
  env.scm = std::move(scm);
  env.arms = enumerate_arms(env.scm);
  env.true_means.reserve(env.arms.size());
  for (const Arm& a : env.arms) env.true_means.push_back(env.scm.true_mean(a));
  env.best_arm = static_cast<int>(
      std::max_element(env.true_means.begin(), env.true_means.end()) - env.true_means.begin());
  return env;
}

// ---------------------------------------------------------------------------
// The two-button game environment: I_A -> A, I_B -> B, {A,B} -> S -> Y,
// P[S=1|a,b] = (1+a+b)/4, P[Y=1|s] = (1+s)/3.
inline BanditEnv make_game_env() {
  Dag g;
  for (const char* n : {"A", "B", "S", "Y", "I_A", "I_B"}) g.add_node(n);
  g.add_edge(4, 0);
  g.add_edge(5, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  g.context = single(4) | single(5);
  g.target = 3;

  DiscreteScm scm;
  scm.graph = g;
  scm.domain = {2, 2, 2, 2, 0, 0};
  scm.cpt.resize(6);
  scm.cpt[0] = Cpt{{}, {}, 2, {0.5, 0.5}};
  scm.cpt[1] = Cpt{{}, {}, 2, {0.5, 0.5}};
  scm.cpt[2] = Cpt{{0, 1}, {2, 2}, 2, {0.75, 0.25, 0.5, 0.5, 0.5, 0.5, 0.25, 0.75}};
  scm.cpt[3] = Cpt{{2}, {2}, 2, {2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0}};
  scm.finalize();
  return finish_env("game", std::move(scm));
}

// ---------------------------------------------------------------------------
// The 4-node suite: all DAGs over {V1,V2,V3,Y} where Y has at least one
// parent, one representative per class under permutations of V1..V3
// (canonical = minimal adjacency encoding over the 3! permutations). Each
// graph gets a context node I_Vi -> Vi for every non-target node.

namespace detail {

inline bool adj_acyclic4(std::uint16_t adj) {
  // adj bit i*4+j set means i -> j
  int indeg[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((adj >> (i * 4 + j)) & 1u) ++indeg[j];
  bool removed[4] = {false, false, false, false};
  for (int step = 0; step < 4; ++step) {
    int pick = -1;
    for (int v = 0; v < 4; ++v)
      if (!removed[v] && indeg[v] == 0) {
        pick = v;
        break;
      }
    if (pick < 0) return false;
    removed[pick] = true;
    for (int j = 0; j < 4; ++j)
      if ((adj >> (pick * 4 + j)) & 1u) --indeg[j];
  }
  return true;
}

inline std::uint16_t adj_permute4(std::uint16_t adj, const std::array<int, 4>& perm) {
  std::uint16_t out = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if ((adj >> (i * 4 + j)) & 1u) out |= std::uint16_t{1} << (perm[i] * 4 + perm[j]);
  return out;
}

inline std::uint16_t adj_canonical4(std::uint16_t adj) {
  static constexpr std::array<std::array<int, 4>, 6> kPerms = {{{0, 1, 2, 3},
                                                                {0, 2, 1, 3},
                                                                {1, 0, 2, 3},
                                                                {1, 2, 0, 3},
                                                                {2, 0, 1, 3},
                                                                {2, 1, 0, 3}}};
  std::uint16_t best = adj;
  for (const auto& p : kPerms) best = std::min(best, adj_permute4(adj, p));
  return best;
}

}  // namespace detail

inline std::vector<Dag> enumerate_4node_suite() {
  std::vector<Dag> suite;
  for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
    // spread the 12 possible edges (i != j) over the 4x4 adjacency bits
    std::uint16_t adj = 0;
    int bit = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        if ((mask >> bit) & 1u) adj |= std::uint16_t{1} << (i * 4 + j);
        ++bit;
      }
    bool y_has_parent = false;
    for (int i = 0; i < 4; ++i) y_has_parent |= (adj >> (i * 4 + 3)) & 1u;
    if (!y_has_parent) continue;
    if (!detail::adj_acyclic4(adj)) continue;
    if (detail::adj_canonical4(adj) != adj) continue;  // not the class representative

    Dag g;
    for (const char* n : {"V1", "V2", "V3", "Y"}) g.add_node(n);
    for (int i = 0; i < 3; ++i) g.add_node("I_V" + std::to_string(i + 1));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if ((adj >> (i * 4 + j)) & 1u) g.add_edge(i, j);
    for (int i = 0; i < 3; ++i) {
      g.add_edge(4 + i, i);
      g.context |= single(4 + i);
    }
    g.target = 3;
    g.validate();
    suite.push_back(std::move(g));
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Random parametrization of a binary-system-node graph: per node a uniform
// binary target vector t_V over its system parents, then
// P[V=1 | pa] = (1 + match(t_V, pa)) / (2 + |pa|).
inline DiscreteScm random_parametrization(const Dag& g, RandomStream& rng) {
  DiscreteScm scm;
  scm.graph = g;
  scm.domain.assign(g.node_count(), 0);
  scm.cpt.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (contains(g.context, v)) continue;
    scm.domain[v] = 2;
    std::vector<NodeId> pa = set_nodes(g.parents[v] & g.system_nodes());
    std::vector<int> target_vec(pa.size());
    for (auto& t : target_vec) t = static_cast<int>(rng.below(2));
    Cpt t;
    t.parents = pa;
    t.parent_domains.assign(pa.size(), 2);
    t.domain = 2;
    int rows = t.rows();
    t.probs.resize(static_cast<std::size_t>(rows) * 2);
    for (int r = 0; r < rows; ++r) {
      int match = 0;
      int rem = r;
      for (std::size_t k = pa.size(); k-- > 0;) {
        if (rem % 2 == target_vec[k]) ++match;
        rem /= 2;
      }
      double p1 = (1.0 + match) / (2.0 + static_cast<double>(pa.size()));
      t.probs[static_cast<std::size_t>(r) * 2] = 1.0 - p1;
      t.probs[static_cast<std::size_t>(r) * 2 + 1] = p1;
    }
    scm.cpt[v] = std::move(t);
  }
  scm.finalize();
  return scm;
}

inline BanditEnv make_env_for_dag(std::string name, const Dag& g, RandomStream& rng) {
  return finish_env(std::move(name), random_parametrization(g, rng));
}

// ---------------------------------------------------------------------------
// The 6-node environment: V1..V6 in fixed topological order, Y = V6, each
// V_i (i > 1) with 1 or 2 uniformly chosen earlier parents. p_two is the
// probability of drawing 2 parents when 2 or more predecessors exist.
inline BanditEnv make_6node_env(RandomStream& rng, double p_two = 0.5) {
  Dag g;
  for (int i = 1; i <= 6; ++i) g.add_node("V" + std::to_string(i));
  for (int i = 1; i <= 5; ++i) g.add_node("I_V" + std::to_string(i));
  for (int i = 0; i < 5; ++i) {
    g.add_edge(6 + i, i);
    g.context |= single(6 + i);
  }
  g.target = 5;
  for (int i = 1; i < 6; ++i) {
    int k = (i >= 2 && rng.bernoulli(p_two)) ? 2 : 1;
    int first = static_cast<int>(rng.below(i));
    g.add_edge(first, i);
    if (k == 2) {
      int second = static_cast<int>(rng.below(i - 1));
      if (second >= first) ++second;
      g.add_edge(second, i);
    }
  }
  g.validate();
  return make_env_for_dag("dag6", g, rng);
}

// ---------------------------------------------------------------------------
// SCM text format: the graph format extended with per-node "domain:" lines
// and "cpt:" blocks (rows of probabilities, 12 significant digits).

inline std::string to_scm_text(const DiscreteScm& scm) {
  std::ostringstream out;
  out << to_graph_text(scm.graph);
  for (NodeId v : scm.system_topo)
    out << "domain: " << scm.graph.names[v] << ' ' << scm.domain[v] << '\n';
  char buf[64];
  for (NodeId v : scm.system_topo) {
    const Cpt& t = scm.cpt[v];
    out << "cpt: " << scm.graph.names[v] << '\n';
    for (int r = 0; r < t.rows(); ++r) {
      for (int k = 0; k < t.domain; ++k) {
        std::snprintf(buf, sizeof buf, "%.12g", t.row(r)[k]);
        out << (k ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

inline DiscreteScm parse_scm_text(const std::string& text) {
  std::string graph_part;
  std::vector<std::pair<std::string, int>> domains;
  std::vector<std::pair<std::string, std::vector<double>>> cpts;
  std::istringstream in(text);
  std::string line;
  std::vector<double>* open_cpt = nullptr;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "domain:") {
      std::string name;
      int d;
      if (!(ls >> name >> d)) throw std::invalid_argument("scm text: bad domain line");
      domains.emplace_back(name, d);
      open_cpt = nullptr;
    } else if (tok == "cpt:") {
      std::string name;
      if (!(ls >> name)) throw std::invalid_argument("scm text: bad cpt line");
      cpts.emplace_back(name, std::vector<double>{});
      open_cpt = &cpts.back().second;
    } else if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) ||
                                tok[0] == '.' || tok[0] == '-')) {
      if (!open_cpt) throw std::invalid_argument("scm text: probabilities outside cpt block");
      open_cpt->push_back(std::stod(tok));
      double p;
      while (ls >> p) open_cpt->push_back(p);
    } else {
      graph_part += line;
      graph_part += '\n';
      open_cpt = nullptr;
    }
  }

  DiscreteScm scm;
  scm.graph = parse_graph_text(graph_part);
  scm.domain.assign(scm.graph.node_count(), 0);
  scm.cpt.resize(scm.graph.node_count());
  for (auto& [name, d] : domains) scm.domain[scm.graph.node_by_name(name)] = d;
  for (auto& [name, probs] : cpts) {
    NodeId v = scm.graph.node_by_name(name);
    Cpt t;
    t.parents = set_nodes(scm.graph.parents[v] & scm.graph.system_nodes());
    for (NodeId p : t.parents) t.parent_domains.push_back(scm.domain[p]);
    t.domain = scm.domain[v];
    t.probs = probs;
    // renormalize away the serialization rounding
    for (int r = 0; r < t.rows() && static_cast<int>(t.probs.size()) == t.rows() * t.domain;
         ++r) {
      double sum = 0;
      for (int k = 0; k < t.domain; ++k) sum += t.row(r)[k];
      if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("scm text: cpt row sum off at " + name);
      for (int k = 0; k < t.domain; ++k)
        t.probs[static_cast<std::size_t>(r) * t.domain + k] /= sum;
    }
    scm.cpt[v] = std::move(t);
  }
  scm.finalize();
  return scm;
}

inline BanditEnv make_env_from_file_text(const std::string& text) {
  return finish_env("file", parse_scm_text(text));
}

}  // namespace cbandits
