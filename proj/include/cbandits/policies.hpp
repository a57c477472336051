#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cbandits/dataset.hpp"
#include "cbandits/discovery.hpp"
#include "cbandits/inference.hpp"
#include "cbandits/rng.hpp"

namespace cbandits {

enum class PolicyKind { kUcb, kTs, kIsUcb, kIsTs };
enum class DiscoveryMode { kNone, kDirectTest, kOracleSepsets, kOracleParents };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kUcb;
  DiscoveryMode discovery = DiscoveryMode::kNone;
  int initial_pulls_per_arm = 10;
  int max_sepset_size = 3;

  bool is_sharing() const { return kind == PolicyKind::kIsUcb || kind == PolicyKind::kIsTs; }

  void validate() const {
    if (is_sharing() && discovery == DiscoveryMode::kNone)
      throw std::invalid_argument("PolicyConfig: is_* policies need a discovery mode");
  }
};

struct RoundLog {
  long t = 0;
  int arm = -1;
  double chosen_index = 0.0;
  bool used_sepset = false;
  NodeSet sepset = 0;
  double width = 0.0;           // width of the winning bound
  double standard_width = 0.0;  // width of the plain Bernoulli-UCB bound
  int reward = 0;
};

/// Anytime confidence schedule: delta = 1 / (1 + N log^2 N).
inline double delta_schedule(long n) {
  double logn = std::log(static_cast<double>(n));
  return 1.0 / (1.0 + static_cast<double>(n) * logn * logn);
}

inline double standard_ucb_width(long n_pulls, double delta) {
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n_pulls)));
}

/// First arm (in ordinal order) still under its initial-phase quota.
inline std::optional<int> initial_phase_arm(const Dataset& d, const std::vector<Arm>& arms,
                                            int pulls) {
  for (const Arm& a : arms)
    if (d.n_arm(a.index) < pulls) return a.index;
  return std::nullopt;
}

/// Baseline UCB over the sample mean; ties broken by lowest ordinal.
inline int choose_ucb(const Dataset& d, const std::vector<Arm>& arms, long n) {
  double delta = delta_schedule(n);
  int best = 0;
  double best_index = -1e300;
  for (const Arm& a : arms) {
    double index = d.mu_sm(a.index) + standard_ucb_width(d.n_arm(a.index), delta);
    if (index > best_index) {
      best_index = index;
      best = a.index;
    }
  }
  return best;
}

/// Baseline Thompson sampling with a Beta(1,1) prior.
inline int choose_ts(const Dataset& d, const std::vector<Arm>& arms, RandomStream& rng) {
  int best = 0;
  double best_index = -1e300;
  for (const Arm& a : arms) {
    double s = static_cast<double>(d.n_y1_arm(a.index));
    double f = static_cast<double>(d.n_arm(a.index)) - s;
    double index = rng.beta(s + 1.0, f + 1.0);
    if (index > best_index) {
      best_index = index;
      best = a.index;
    }
  }
  return best;
}

namespace detail {

struct WidthCompetition {
  double best_index;
  double best_width;
  double standard_width;
  bool used_sepset = false;
  NodeSet sepset = 0;
};

// Start from the standard Bernoulli-UCB bound and keep the
// separating-set index whose width (index minus its point estimate) is
// smallest. Sets with incomplete support are skipped this round.
inline WidthCompetition compete_widths(const Dataset& d, const Dag& g,
                                       const SepSetCatalog& catalog, const Arm& arm,
                                       double delta) {
  WidthCompetition w;
  w.standard_width = standard_ucb_width(d.n_arm(arm.index), delta);
  w.best_width = w.standard_width;
  w.best_index = d.mu_sm(arm.index) + w.standard_width;
  for (NodeSet s : catalog.accepted) {
    double new_index, point;
    try {
      auto b = sepset_bound(d, g, s, arm, delta, true);
      new_index = b.bound;
      point = b.point;
    } catch (const IncompleteSupportError&) {
      continue;
    }
    double new_width = new_index - point;
    if (new_width < w.best_width) {
      w.best_width = new_width;
      w.best_index = new_index;
      w.used_sepset = true;
      w.sepset = s;
    }
  }
  return w;
}

}  // namespace detail

/// Information-sharing UCB. Returns the chosen arm plus a round log
/// with the winning width.
inline RoundLog choose_is_ucb(const Dataset& d, const Dag& g, const SepSetCatalog& catalog,
                              const std::vector<Arm>& arms, long n) {
  double delta = delta_schedule(n);
  RoundLog log;
  double best_index = -1e300;
  for (const Arm& a : arms) {
    auto w = detail::compete_widths(d, g, catalog, a, delta);
    if (w.best_index > best_index) {
      best_index = w.best_index;
      log.arm = a.index;
      log.chosen_index = w.best_index;
      log.used_sepset = w.used_sepset;
      log.sepset = w.sepset;
      log.width = w.best_width;
      log.standard_width = w.standard_width;
    }
  }
  return log;
}

/// Information-sharing Thompson sampling: the width competition selects
/// a separating set per arm; if one wins, the index is p~' mu~ with
/// p~ ~ Dirichlet(counts + 0.5) over the arm's effective domain and
/// mu~_s ~ Beta(pooled successes + 1, pooled failures + 1); otherwise the
/// traditional Beta draw.
inline int choose_is_ts(const Dataset& d, const Dag& g, const SepSetCatalog& catalog,
                        const std::vector<Arm>& arms, long n, RandomStream& rng) {
  double delta = delta_schedule(n);
  int best = 0;
  double best_index = -1e300;
  for (const Arm& a : arms) {
    auto w = detail::compete_widths(d, g, catalog, a, delta);
    double index;
    if (w.used_sepset) {
      std::vector<int> dom = effective_domain(g, d.domains(), w.sepset, a);
      std::vector<double> conc(dom.size());
      for (std::size_t i = 0; i < dom.size(); ++i)
        conc[i] = static_cast<double>(d.n_s_arm(w.sepset, dom[i], a.index)) + 0.5;
      std::vector<double> p = rng.dirichlet(conc);
      index = 0.0;
      for (std::size_t i = 0; i < dom.size(); ++i) {
        double s1 = static_cast<double>(d.n_y1_s(w.sepset, dom[i]));
        double s0 = static_cast<double>(d.n_s(w.sepset, dom[i])) - s1;
        index += p[i] * rng.beta(s1 + 1.0, s0 + 1.0);
      }
    } else {
      double s = static_cast<double>(d.n_y1_arm(a.index));
      double f = static_cast<double>(d.n_arm(a.index)) - s;
      index = rng.beta(s + 1.0, f + 1.0);
    }
    if (index > best_index) {
      best_index = index;
      best = a.index;
    }
  }
  return best;
}

}  // namespace cbandits
