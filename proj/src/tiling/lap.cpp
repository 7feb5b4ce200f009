#include "domino/lap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "domino/errors.hpp"

namespace domino::tiling {

CostMatrix CostMatrix::dense(const std::vector<std::vector<double>>& costs) {
  const int n = static_cast<int>(costs.size());
  CostMatrix m(n);
  std::vector<Entry> row;
  for (const auto& r : costs) {
    if (static_cast<int>(r.size()) != n) throw PreconditionError("dense cost matrix must be square");
    row.clear();
    for (int j = 0; j < n; ++j) row.push_back({j, r[j]});
    m.add_agent(row);
  }
  return m;
}

void CostMatrix::add_agent(std::span<const Entry> entries) {
  if (complete()) throw PreconditionError("cost matrix already has all agents");
  for (const Entry& e : entries) {
    if (e.task < 0 || e.task >= n_) throw PreconditionError("task index out of range");
    if (!std::isfinite(e.cost)) throw PreconditionError("cost entries must be finite");
  }
  entries_.insert(entries_.end(), entries.begin(), entries.end());
  offsets_.push_back(static_cast<int>(entries_.size()));
}

bool CostMatrix::permitted(int agent, int task) const noexcept {
  for (const Entry& e : row(agent)) {
    if (e.task == task) return true;
  }
  return false;
}

double CostMatrix::cost(int agent, int task) const {
  for (const Entry& e : row(agent)) {
    if (e.task == task) return e.cost;
  }
  throw PreconditionError("pair (" + std::to_string(agent) + ", " + std::to_string(task) +
                          ") is not permitted");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class SparseJv {
 public:
  explicit SparseJv(const CostMatrix& c)
      : c_(c),
        n_(c.size()),
        v_(n_, kInf),
        x_(n_, -1),
        y_(n_, -1),
        assigned_cost_(n_, 0.0),
        dist_(n_, kInf),
        pred_(n_, -1),
        pred_cost_(n_, 0.0),
        done_(n_, 0) {}

  Assignment solve() {
    std::vector<int> free_rows = column_reduction();
    free_rows = augmenting_row_reduction(std::move(free_rows));
    free_rows = augmenting_row_reduction(std::move(free_rows));
    for (int row : free_rows) augment(row);

    Assignment out;
    out.task_of_agent = x_;
    out.agent_of_task = y_;
    for (int i = 0; i < n_; ++i) out.total_cost += assigned_cost_[i];
    return out;
  }

 private:
  void assign(int row, int col, double cost) {
    x_[row] = col;
    y_[col] = row;
    assigned_cost_[row] = cost;
  }

  // Column reduction followed by reduction transfer. Returns the free rows.
  std::vector<int> column_reduction() {
    std::vector<int> argmin(n_, -1);
    std::vector<double> mincost(n_, kInf);
    for (int i = 0; i < n_; ++i) {
      const auto row = c_.row(i);
      if (row.empty()) throw InfeasibleError("agent " + std::to_string(i) + " has no permitted task");
      for (const auto& e : row) {
        if (e.cost < mincost[e.task]) {
          mincost[e.task] = e.cost;
          argmin[e.task] = i;
        }
      }
    }
    for (int j = 0; j < n_; ++j) {
      if (argmin[j] < 0) throw InfeasibleError("task " + std::to_string(j) + " has no permitted agent");
      v_[j] = mincost[j];
    }

    std::vector<char> multiple(n_, 0);
    for (int j = n_ - 1; j >= 0; --j) {
      const int i = argmin[j];
      if (x_[i] < 0) {
        assign(i, j, mincost[j]);
      } else {
        multiple[i] = 1;
      }
    }

    std::vector<int> free_rows;
    for (int i = 0; i < n_; ++i) {
      if (x_[i] < 0) {
        free_rows.push_back(i);
      } else if (!multiple[i]) {
        const int j1 = x_[i];
        double mu = kInf;
        for (const auto& e : c_.row(i)) {
          if (e.task != j1) mu = std::min(mu, e.cost - v_[e.task]);
        }
        if (mu < kInf) v_[j1] = assigned_cost_[i] - mu;
      }
    }
    return free_rows;
  }

  // One pass of auction-like augmenting row reduction.
  std::vector<int> augmenting_row_reduction(std::vector<int> pending) {
    std::vector<int> next;
    std::size_t head = 0;
    // Price decrements can be arbitrarily small in floating point; bound the
    // number of in-place retries and leave the rest to the augmentation phase.
    std::size_t retries_left = 4 * static_cast<std::size_t>(n_) + 64;
    while (head < pending.size()) {
      const int i = pending[head++];
      double best = kInf;
      double second = kInf;
      int best_col = -1;
      int second_col = -1;
      double best_cost = 0.0;
      double second_cost = 0.0;
      for (const auto& e : c_.row(i)) {
        const double d = e.cost - v_[e.task];
        if (d < second) {
          if (d >= best) {
            second = d;
            second_col = e.task;
            second_cost = e.cost;
          } else {
            second = best;
            second_col = best_col;
            second_cost = best_cost;
            best = d;
            best_col = e.task;
            best_cost = e.cost;
          }
        }
      }

      if (second_col < 0) {
        // Single permitted task: take it without a price change.
        const int displaced = y_[best_col];
        assign(i, best_col, best_cost);
        if (displaced >= 0) {
          x_[displaced] = -1;
          next.push_back(displaced);
        }
        continue;
      }

      int col = best_col;
      double cost = best_cost;
      int displaced = y_[col];
      const bool strict = best < second;
      if (strict) {
        v_[col] -= second - best;
      } else if (displaced >= 0) {
        col = second_col;
        cost = second_cost;
        displaced = y_[col];
      }
      assign(i, col, cost);
      if (displaced >= 0) {
        x_[displaced] = -1;
        if (strict && retries_left > 0) {
          --retries_left;
          pending[--head] = displaced;
        } else {
          next.push_back(displaced);
        }
      }
    }
    return next;
  }

  // Shortest augmenting path from a free row over reduced costs.
  void augment(int source) {
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    touched_.clear();
    scanned_.clear();

    auto relax = [&](int row, int col, double d, double cost) {
      if (d < dist_[col]) {
        if (dist_[col] == kInf) touched_.push_back(col);
        dist_[col] = d;
        pred_[col] = row;
        pred_cost_[col] = cost;
        heap.emplace(d, col);
      }
    };

    for (const auto& e : c_.row(source)) relax(source, e.task, e.cost - v_[e.task], e.cost);

    int sink = -1;
    double shortest = kInf;
    while (!heap.empty()) {
      const auto [d, j] = heap.top();
      heap.pop();
      if (done_[j] || d > dist_[j]) continue;
      done_[j] = 1;
      if (y_[j] < 0) {
        sink = j;
        shortest = d;
        break;
      }
      scanned_.push_back(j);
      const int i = y_[j];
      const double row_potential = assigned_cost_[i] - v_[j];
      for (const auto& e : c_.row(i)) {
        if (done_[e.task]) continue;
        relax(i, e.task, d + (e.cost - v_[e.task]) - row_potential, e.cost);
      }
    }

    if (sink < 0) {
      reset_search();
      throw InfeasibleError("no augmenting path from agent " + std::to_string(source) +
                            ": no perfect matching over permitted entries");
    }

    for (int j : scanned_) v_[j] += dist_[j] - shortest;

    int j = sink;
    while (true) {
      const int i = pred_[j];
      const int previous = x_[i];
      assign(i, j, pred_cost_[j]);
      if (i == source) break;
      j = previous;
    }
    reset_search();
  }

  void reset_search() {
    for (int j : touched_) {
      dist_[j] = kInf;
      done_[j] = 0;
      pred_[j] = -1;
    }
  }

  const CostMatrix& c_;
  int n_;
  std::vector<double> v_;
  std::vector<int> x_;
  std::vector<int> y_;
  std::vector<double> assigned_cost_;

  std::vector<double> dist_;
  std::vector<int> pred_;
  std::vector<double> pred_cost_;
  std::vector<char> done_;
  std::vector<int> touched_;
  std::vector<int> scanned_;
};

}  // namespace

Assignment solve_lap(const CostMatrix& costs) {
  if (!costs.complete()) throw PreconditionError("cost matrix is missing agents");
  if (costs.size() == 0) return {};
  return SparseJv(costs).solve();
}

}  // namespace domino::tiling
