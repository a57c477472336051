#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbandits/dataset.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/mathfn.hpp"

namespace cbandits {

// ---------------------------------------------------------------------------
// G^2 likelihood-ratio independence test, stratified by a conditioning set.
// Strata with fewer than 2 positive row or column marginals contribute
// nothing to the statistic or the degrees of freedom; 0*ln(0/E) is 0.

struct G2Result {
  double g2 = 0.0;
  long df = 0;
  double p_value = 1.0;
};

namespace detail {

// tables: per stratum, row-major counts (rows x cols).
inline G2Result g2_from_tables(const std::vector<std::vector<long>>& tables, int rows,
                               int cols) {
  G2Result res;
  std::vector<double> row_sum(rows), col_sum(cols);
  for (const auto& t : tables) {
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    double n = 0.0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double o = static_cast<double>(t[static_cast<std::size_t>(r) * cols + c]);
        row_sum[r] += o;
        col_sum[c] += o;
        n += o;
      }
    int r_pos = 0, c_pos = 0;
    for (int r = 0; r < rows; ++r) r_pos += row_sum[r] > 0;
    for (int c = 0; c < cols; ++c) c_pos += col_sum[c] > 0;
    if (r_pos < 2 || c_pos < 2) continue;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double o = static_cast<double>(t[static_cast<std::size_t>(r) * cols + c]);
        if (o <= 0) continue;
        double e = row_sum[r] * col_sum[c] / n;
        res.g2 += 2.0 * o * std::log(o / e);
      }
    res.df += static_cast<long>(r_pos - 1) * (c_pos - 1);
  }
  res.p_value = res.df == 0 ? 1.0 : chi2_sf(res.g2, static_cast<double>(res.df));
  return res;
}

}  // namespace detail

/// A test variable: either the joint intervention assignment (the arm
/// ordinal) or a single system node.
struct VarSpec {
  bool is_arm = false;
  NodeId node = -1;
  static VarSpec arm() { return {true, -1}; }
  static VarSpec of(NodeId v) { return {false, v}; }
};

inline G2Result g2_test(const Dataset& d, VarSpec x, VarSpec y, NodeSet cond) {
  int rows = x.is_arm ? d.n_arms() : d.domains()[x.node];
  int cols = y.is_arm ? d.n_arms() : d.domains()[y.node];
  int strata = d.cells(cond);
  std::vector<std::vector<long>> tables(strata,
                                        std::vector<long>(static_cast<std::size_t>(rows) * cols, 0));
  for (const auto& rec : d.records()) {
    int r = x.is_arm ? rec.arm : rec.values[x.node];
    int c = y.is_arm ? rec.arm : rec.values[y.node];
    int s = cell_index(d.domains(), cond, rec.values);
    ++tables[s][static_cast<std::size_t>(r) * cols + c];
  }
  return detail::g2_from_tables(tables, rows, cols);
}

// ---------------------------------------------------------------------------
// Separating-set catalog and online discovery.

enum class Provenance { kOracle, kDirectTest };

struct SepSetCatalog {
  std::vector<NodeSet> accepted;  // ordered by size, then lexicographically
  Provenance provenance = Provenance::kDirectTest;
  std::size_t last_run_n = 0;
  bool has_run = false;
};

/// Candidate subsets of the system nodes minus the target, by size then
/// lexicographic node order.
inline std::vector<NodeSet> sepset_candidates(const Dag& g, int max_size) {
  NodeSet pool = g.system_nodes() & ~single(g.target);
  std::vector<NodeId> nodes = set_nodes(pool);
  std::vector<NodeSet> out;
  for (std::uint32_t sub = 0; sub < (1u << nodes.size()); ++sub) {
    if (std::popcount(sub) > max_size) continue;
    NodeSet s = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if ((sub >> i) & 1u) s |= single(nodes[i]);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](NodeSet a, NodeSet b) {
    if (set_size(a) != set_size(b)) return set_size(a) < set_size(b);
    return set_nodes(a) < set_nodes(b);
  });
  return out;
}

/// Direct testing: accept S iff the G^2 test of (arm vs Y given S) fails
/// to reject at threshold 2.5/sqrt(N). When the threshold saturates at 1
/// the test has no power and every candidate stands.
inline SepSetCatalog discover(const Dataset& d, const Dag& g, int max_size) {
  SepSetCatalog cat;
  cat.provenance = Provenance::kDirectTest;
  cat.last_run_n = d.size();
  cat.has_run = true;
  double threshold = 2.5 / std::sqrt(static_cast<double>(d.size()));
  for (NodeSet s : sepset_candidates(g, max_size)) {
    if (threshold >= 1.0 || g2_test(d, VarSpec::arm(), VarSpec::of(g.target), s).p_value >=
                                threshold)
      cat.accepted.push_back(s);
  }
  return cat;
}

/// Oracle catalog: the true separating sets from d-separation.
inline SepSetCatalog oracle_sepset_catalog(const Dag& g, int max_size) {
  SepSetCatalog cat;
  cat.provenance = Provenance::kOracle;
  cat.accepted = oracle_separating_sets(g, max_size);
  cat.has_run = true;
  return cat;
}

/// Oracle catalog holding only the parents of the target node (the
/// known-separating-set baseline).
inline SepSetCatalog parents_catalog(const Dag& g) {
  SepSetCatalog cat;
  cat.provenance = Provenance::kOracle;
  cat.accepted = {g.parents[g.target] & g.system_nodes()};
  cat.has_run = true;
  return cat;
}

/// Re-run cadence: once the dataset has grown by 25% since the last run.
inline bool should_rerun(const SepSetCatalog& cat, std::size_t n_now, double growth = 1.25) {
  if (!cat.has_run) return true;
  return n_now >= static_cast<std::size_t>(
                      std::ceil(growth * static_cast<double>(cat.last_run_n)));
}

struct DiscoveryMetrics {
  double sensitivity = 1.0;
  double false_positive_rate = 0.0;
  std::size_t n = 0;
  bool no_true_sets = false;  // sensitivity reported as 1 by convention
};

/// Set-level sensitivity and false positive rate against the d-separation
/// oracle, over all candidates up to max_size.
inline DiscoveryMetrics score_discovery(const SepSetCatalog& cat, const Dag& g, int max_size) {
  DiscoveryMetrics m;
  m.n = cat.last_run_n;
  std::vector<NodeSet> truth = oracle_separating_sets(g, max_size);
  std::vector<NodeSet> candidates = sepset_candidates(g, max_size);
  auto is_true = [&](NodeSet s) {
    return std::find(truth.begin(), truth.end(), s) != truth.end();
  };
  long tp = 0, fp = 0;
  for (NodeSet s : cat.accepted) (is_true(s) ? tp : fp)++;
  long negatives = static_cast<long>(candidates.size() - truth.size());
  if (truth.empty()) {
    m.sensitivity = 1.0;
    m.no_true_sets = true;
  } else {
    m.sensitivity = static_cast<double>(tp) / static_cast<double>(truth.size());
  }
  m.false_positive_rate =
      negatives == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(negatives);
  return m;
}

}  // namespace cbandits
