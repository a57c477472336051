#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbandits/errors.hpp"
#include "cbandits/scm.hpp"

namespace cbandits {

/// Append-only interaction log with incremental count caches. Counts are
/// integers; estimator ratios go to floating point only at the query
/// boundary. Caches are created lazily per queried variable subset and
/// cover every record, past and future.
class Dataset {
 public:
  struct Record {
    int arm;
    std::vector<std::uint8_t> values;  // per node id; context slots unused
  };

  Dataset(const Dag& graph, const std::vector<int>& domains, int n_arms)
      : graph_(graph), domains_(domains), n_arms_(n_arms), by_arm_(n_arms, 0), y1_by_arm_(n_arms, 0) {}

  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }
  int n_arms() const { return n_arms_; }

  void append(int arm, const std::vector<std::uint8_t>& outcome) {
    if (arm < 0 || arm >= n_arms_) throw std::invalid_argument("Dataset::append: bad arm");
    NodeSet sys = graph_.system_nodes();
    if (outcome.size() != static_cast<std::size_t>(graph_.node_count()))
      throw std::invalid_argument("Dataset::append: outcome must assign every system node");
    for (NodeId v : set_nodes(sys))
      if (outcome[v] >= domains_[v])
        throw std::invalid_argument("Dataset::append: outcome value out of domain");
    records_.push_back({arm, outcome});
    ++by_arm_[arm];
    bool y1 = outcome[graph_.target] == 1;
    if (y1) ++y1_by_arm_[arm];
    for (auto& [vars, table] : tables_) bump(table, vars, arm, outcome, y1);
  }

  // --- raw counts -----------------------------------------------------

  long n_arm(int arm) const { return by_arm_[arm]; }
  long n_y1_arm(int arm) const { return y1_by_arm_[arm]; }

  long n_s(NodeSet s_vars, int cell) const { return table_for(s_vars).total[cell]; }
  long n_y1_s(NodeSet s_vars, int cell) const { return table_for(s_vars).y1[cell]; }
  long n_s_arm(NodeSet s_vars, int cell, int arm) const {
    const Table& t = table_for(s_vars);
    return t.per_arm[static_cast<std::size_t>(cell) * n_arms_ + arm];
  }
  long n_y1_s_arm(NodeSet s_vars, int cell, int arm) const {
    const Table& t = table_for(s_vars);
    return t.y1_per_arm[static_cast<std::size_t>(cell) * n_arms_ + arm];
  }
  int cells(NodeSet s_vars) const { return cell_count(domains_, s_vars); }

  // --- estimators -----------------------------------------------------

  /// p_hat(s | arm) = N(S=s, I=arm) / N(I=arm).
  double p_hat(NodeSet s_vars, int cell, int arm) const {
    long n = by_arm_[arm];
    if (n == 0) throw NoDataError("p_hat: no data for arm");
    return static_cast<double>(n_s_arm(s_vars, cell, arm)) / static_cast<double>(n);
  }

  /// mu_hat(s) = N(Y=1, S=s) / N(S=s), pooled over all arms.
  double mu_hat(NodeSet s_vars, int cell) const {
    long n = n_s(s_vars, cell);
    if (n == 0) throw NoDataError("mu_hat: no data for this s value");
    return static_cast<double>(n_y1_s(s_vars, cell)) / static_cast<double>(n);
  }

  /// Naive sample mean of Y under the arm.
  double mu_sm(int arm) const {
    long n = by_arm_[arm];
    if (n == 0) throw NoDataError("mu_sm: no data for arm");
    return static_cast<double>(y1_by_arm_[arm]) / static_cast<double>(n);
  }

  /// CSV dump: arm components, then node values in id order.
  void dump_csv(std::ostream& out, const std::vector<Arm>& arms) const {
    out << "arm";
    std::size_t slots = arms.empty() ? 0 : arms[0].ctx.size();
    for (std::size_t slot = 0; slot < slots; ++slot) out << ",ctx" << slot;
    for (NodeId v : set_nodes(graph_.system_nodes())) out << ',' << graph_.names[v];
    out << '\n';
    for (const Record& r : records_) {
      out << r.arm;
      for (std::size_t slot = 0; slot < slots; ++slot)
        out << ',' << static_cast<int>(arms[r.arm].ctx[slot]);
      for (NodeId v : set_nodes(graph_.system_nodes()))
        out << ',' << static_cast<int>(r.values[v]);
      out << '\n';
    }
  }

  const Dag& graph() const { return graph_; }
  const std::vector<int>& domains() const { return domains_; }

 private:
  struct Table {
    std::vector<long> total;       // per cell
    std::vector<long> y1;          // per cell
    std::vector<long> per_arm;     // cell-major, n_arms per cell
    std::vector<long> y1_per_arm;  // cell-major
  };

  void bump(Table& t, NodeSet vars, int arm, const std::vector<std::uint8_t>& values,
            bool y1) const {
    int cell = cell_index(domains_, vars, values);
    ++t.total[cell];
    if (y1) ++t.y1[cell];
    ++t.per_arm[static_cast<std::size_t>(cell) * n_arms_ + arm];
    if (y1) ++t.y1_per_arm[static_cast<std::size_t>(cell) * n_arms_ + arm];
  }

  const Table& table_for(NodeSet s_vars) const {
    auto it = tables_.find(s_vars);
    if (it != tables_.end()) return it->second;
    Table t;
    int n_cells = cell_count(domains_, s_vars);
    t.total.assign(n_cells, 0);
    t.y1.assign(n_cells, 0);
    t.per_arm.assign(static_cast<std::size_t>(n_cells) * n_arms_, 0);
    t.y1_per_arm.assign(static_cast<std::size_t>(n_cells) * n_arms_, 0);
    for (const Record& r : records_)
      bump(t, s_vars, r.arm, r.values, r.values[graph_.target] == 1);
    return tables_.emplace(s_vars, std::move(t)).first->second;
  }

  Dag graph_;
  std::vector<int> domains_;
  int n_arms_;
  std::vector<Record> records_;
  std::vector<long> by_arm_;
  std::vector<long> y1_by_arm_;
  mutable std::unordered_map<NodeSet, Table> tables_;
};

}  // namespace cbandits
