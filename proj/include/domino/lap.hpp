#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace domino::tiling {

// Sparse balanced assignment instance in compressed-row form. Entries that
// are not stored are forbidden; they are never materialized.
class CostMatrix {
 public:
  struct Entry {
    int task;
    double cost;
  };

  CostMatrix() = default;
  explicit CostMatrix(int n) : n_(n), offsets_{0} { offsets_.reserve(n + 1); }

  // Dense n x n instance with every entry permitted.
  static CostMatrix dense(const std::vector<std::vector<double>>& costs);

  // Agents must be added in order 0, 1, ..., n-1.
  void add_agent(std::span<const Entry> entries);

  int size() const noexcept { return n_; }
  int n_agents() const noexcept { return n_; }
  int n_tasks() const noexcept { return n_; }
  bool complete() const noexcept { return static_cast<int>(offsets_.size()) == n_ + 1; }

  std::span<const Entry> row(int agent) const noexcept {
    return {entries_.data() + offsets_[agent],
            static_cast<std::size_t>(offsets_[agent + 1] - offsets_[agent])};
  }

  // Cost of (agent, task), or nullopt-like NaN when the pair is forbidden.
  bool permitted(int agent, int task) const noexcept;
  double cost(int agent, int task) const;

 private:
  int n_ = 0;
  std::vector<int> offsets_{0};
  std::vector<Entry> entries_;
};

struct Assignment {
  std::vector<int> task_of_agent;
  std::vector<int> agent_of_task;
  double total_cost = 0.0;
};

// Minimum-cost perfect matching over the permitted entries.
//
// Jonker-Volgenant on adjacency lists: column reduction, reduction transfer,
// two rounds of augmenting row reduction, then shortest augmenting paths
// found with a binary-heap Dijkstra over reduced costs. Ties resolve to the
// lowest index in scan order, so the result is deterministic.
//
// Throws InfeasibleError when no perfect matching exists.
Assignment solve_lap(const CostMatrix& costs);

}  // namespace domino::tiling
