#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbandits/dataset.hpp"
#include "cbandits/errors.hpp"
#include "cbandits/graph.hpp"
#include "cbandits/rng.hpp"
#include "cbandits/scm.hpp"

namespace cbandits {

/// Cells of D(S) consistent with the arm's perfect interventions: any
/// coordinate of S that the arm pins is fixed to the pinned value, the
/// rest range over their full domains.
inline std::vector<int> effective_domain(const Dag& g, const std::vector<int>& domains,
                                         NodeSet s_vars, const Arm& arm) {
  std::vector<NodeId> ctx = set_nodes(g.context);
  std::vector<std::int8_t> pin(g.node_count(), -1);
  for (std::size_t slot = 0; slot < ctx.size(); ++slot) {
    if (!arm.intervenes(slot)) continue;
    for (NodeId child : set_nodes(g.children[ctx[slot]])) pin[child] = arm.ctx[slot];
  }
  std::vector<NodeId> nodes = set_nodes(s_vars);
  std::vector<int> cells;
  auto rec = [&](auto&& self, std::size_t i, int idx) -> void {
    if (i == nodes.size()) {
      cells.push_back(idx);
      return;
    }
    NodeId v = nodes[i];
    if (pin[v] >= 0) {
      self(self, i + 1, idx * domains[v] + pin[v]);
      return;
    }
    for (int val = 0; val < domains[v]; ++val) self(self, i + 1, idx * domains[v] + val);
  };
  rec(rec, 0, 0);
  return cells;
}

inline std::vector<int> effective_domain(const Dataset& d, NodeSet s_vars, const Arm& arm) {
  return effective_domain(d.graph(), d.domains(), s_vars, arm);
}

/// The information sharing estimator: sum over observed s of
/// mu_hat(s) * p_hat(s | arm).
inline double mu_is(const Dataset& d, NodeSet s_vars, const Arm& arm) {
  long n = d.n_arm(arm.index);
  if (n == 0) throw NoDataError("mu_is: no data for arm");
  double out = 0.0;
  int cells = d.cells(s_vars);
  for (int c = 0; c < cells; ++c) {
    long n_sz = d.n_s_arm(s_vars, c, arm.index);
    if (n_sz == 0) continue;
    out += d.mu_hat(s_vars, c) * (static_cast<double>(n_sz) / static_cast<double>(n));
  }
  return out;
}

namespace detail {

struct SepSetBound {
  double point;  // mu_is restricted to the effective domain
  double bound;  // idx or lcb_idx
};

// Shared evaluator for the upper and the symmetric lower bound. Bound
// widths use the effective domain size in both the Hoeffding and the
// Weissman part; values are not clipped to [0,1].
inline SepSetBound sepset_bound(const Dataset& d, const Dag& g, NodeSet s_vars, const Arm& arm,
                                double delta, bool upper) {
  long n_arm = d.n_arm(arm.index);
  if (n_arm == 0) throw NoDataError("idx: no data for arm");
  std::vector<int> dom = effective_domain(g, d.domains(), s_vars, arm);
  double size = static_cast<double>(dom.size());

  double point = 0.0, p_dot_bound = 0.0;
  double hi = -1e300, lo = 1e300;
  for (int cell : dom) {
    long n_s = d.n_s(s_vars, cell);
    if (n_s == 0)
      throw IncompleteSupportError("idx: effective-domain value with no pooled data");
    double mu = d.mu_hat(s_vars, cell);
    double width = std::sqrt(std::log(2.0 * size / delta) / (2.0 * static_cast<double>(n_s)));
    double b = upper ? mu + width : mu - width;
    hi = std::max(hi, b);
    lo = std::min(lo, b);
    double p = static_cast<double>(d.n_s_arm(s_vars, cell, arm.index)) /
               static_cast<double>(n_arm);
    point += p * mu;
    p_dot_bound += p * b;
  }
  double delta_p = std::sqrt(size * std::log(4.0 / delta) / (2.0 * static_cast<double>(n_arm)));
  double bound = upper ? p_dot_bound + delta_p * (hi - lo) : p_dot_bound - delta_p * (hi - lo);
  return {point, bound};
}

}  // namespace detail

/// Upper confidence index with the known-target support restriction.
/// Throws IncompleteSupportError when some effective-domain value has no
/// pooled data yet.
inline double idx(const Dataset& d, const Dag& g, NodeSet s_vars, const Arm& arm, double delta) {
  return detail::sepset_bound(d, g, s_vars, arm, delta, true).bound;
}

/// Symmetric lower bound.
inline double lcb_idx(const Dataset& d, const Dag& g, NodeSet s_vars, const Arm& arm,
                      double delta) {
  return detail::sepset_bound(d, g, s_vars, arm, delta, false).bound;
}

// ---------------------------------------------------------------------------
// Variance diagnostics: the per-s data-sharing fractions alpha(s), the
// Monte-Carlo estimate of alpha*, and the two exact population variance
// terms.

struct VarianceDiagnostics {
  std::vector<double> alpha_per_s;  // per effective-domain cell, N(S=s, I!=arm)/N(S=s)
  std::vector<int> cells;           // the effective-domain cells diagnosed
  double alpha_star = 0.0;
  double term_between = 0.0;  // V_{s~P[s|arm]}[E[Y|S=s]]
  double term_within = 0.0;   // E_{s~P[s|arm]}[E[Y|s](1 - E[Y|s])]
};

/// alpha per s from the dataset; alpha* estimated by replaying datasets
/// with the same per-arm allocation (mc_reps replications); variance
/// terms computed exactly from the SCM.
inline VarianceDiagnostics variance_diagnostics(const Dataset& d, const DiscreteScm& scm,
                                                const std::vector<Arm>& arms, NodeSet s_vars,
                                                const Arm& arm, RandomStream& rng,
                                                int mc_reps = 1000) {
  VarianceDiagnostics out;
  out.cells = effective_domain(d.graph(), d.domains(), s_vars, arm);
  for (int cell : out.cells) {
    long n_s = d.n_s(s_vars, cell);
    long n_sz = d.n_s_arm(s_vars, cell, arm.index);
    out.alpha_per_s.push_back(n_s == 0 ? 0.0
                                       : static_cast<double>(n_s - n_sz) /
                                             static_cast<double>(n_s));
  }

  auto joint = scm.exact_sepset_distribution(arm, s_vars);
  double mean = 0.0;
  std::vector<double> p_s, mu_s;
  for (int cell : out.cells) {
    double p = joint[cell].first;
    double mu = p > 0 ? joint[cell].second / p : 0.0;
    p_s.push_back(p);
    mu_s.push_back(mu);
    mean += p * mu;
  }
  for (std::size_t i = 0; i < p_s.size(); ++i) {
    out.term_between += p_s[i] * (mu_s[i] - mean) * (mu_s[i] - mean);
    out.term_within += p_s[i] * mu_s[i] * (1.0 - mu_s[i]);
  }

  // alpha* = E[p_hat (x) alpha]' w / E[p_hat]' w with w = mu(1-mu),
  // expectation over datasets with this dataset's per-arm counts.
  std::vector<long> alloc(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a) alloc[a] = d.n_arm(static_cast<int>(a));
  long n_this = alloc[arm.index];
  std::size_t n_cells_all = static_cast<std::size_t>(cell_count(d.domains(), s_vars));
  std::vector<double> e_phat(out.cells.size(), 0.0), e_phat_alpha(out.cells.size(), 0.0);
  std::vector<long> cnt_total(n_cells_all), cnt_arm(n_cells_all);
  for (int rep = 0; rep < mc_reps; ++rep) {
    std::fill(cnt_total.begin(), cnt_total.end(), 0);
    std::fill(cnt_arm.begin(), cnt_arm.end(), 0);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      for (long k = 0; k < alloc[a]; ++k) {
        auto values = scm.sample(arms[a], rng);
        int cell = cell_index(d.domains(), s_vars, values);
        ++cnt_total[cell];
        if (static_cast<int>(a) == arm.index) ++cnt_arm[cell];
      }
    }
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
      int cell = out.cells[i];
      double ph = n_this > 0 ? static_cast<double>(cnt_arm[cell]) / static_cast<double>(n_this)
                             : 0.0;
      double alpha = cnt_total[cell] > 0
                         ? static_cast<double>(cnt_total[cell] - cnt_arm[cell]) /
                               static_cast<double>(cnt_total[cell])
                         : 0.0;
      e_phat[i] += ph;
      e_phat_alpha[i] += ph * alpha;
    }
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    double w = mu_s[i] * (1.0 - mu_s[i]);
    num += (e_phat_alpha[i] / mc_reps) * w;
    den += (e_phat[i] / mc_reps) * w;
  }
  out.alpha_star = den > 0 ? num / den : 0.0;
  return out;
}

}  // namespace cbandits
