#include <algorithm>
#include <limits>

#include "compiled.hpp"
#include "lrho/subsolver.hpp"

namespace lrho {

namespace {

// Enumerates semi-active schedules by appending operations in nondecreasing start order.
// Every semi-active schedule is reached this way, so exhausting the tree certifies optimality.
class BranchAndBound {
 public:
  explicit BranchAndBound(const detail::Compiled& c)
      : c_(c),
        done_(c.n, 0),
        start_(c.n, 0),
        end_(c.n, 0),
        machine_(c.n, -1),
        avail_(c.machine_ready),
        min_dur_(c.n, std::numeric_limits<Time>::max()) {
    for (int i = 0; i < c.n; ++i)
      for (MachineId m : c.allowed[i]) min_dur_[i] = std::min(min_dur_[i], c.duration(i, m));
  }

  void run(Time incumbent, std::vector<MachineId> machine, std::vector<Time> start) {
    best_ = incumbent;
    best_machine_ = std::move(machine);
    best_start_ = std::move(start);
    dfs(0, std::numeric_limits<Time>::min(), 0);
  }

  Solution solution() const { return c_.to_solution(best_machine_, best_start_); }

 private:
  Time add_cost(Time cost, int i, Time s, Time e) const {
    switch (c_.kind) {
      case ObjectiveKind::Makespan: return std::max(cost, e);
      case ObjectiveKind::TotalStartDelay: return cost + s - c_.release[i];
      case ObjectiveKind::StartPlusEndDelay: return cost + s - c_.release[i] + std::max<Time>(e - c_.target[i], 0);
    }
    return cost;
  }

  // Relaxation: every remaining op starts no earlier than last_start, its job chain and release,
  // and takes its shortest allowed duration; machine capacity is ignored.
  Time lower_bound(Time cost, Time last_start) const {
    Time lb = cost;
    std::vector<char> seen(c_.n, 0);
    for (int i = 0; i < c_.n; ++i) {
      if (done_[i] || seen[i]) continue;
      if (c_.job_pred[i] >= 0 && !done_[c_.job_pred[i]]) continue;
      // i heads the remaining part of its job chain inside the window
      Time t = c_.job_pred[i] >= 0 ? end_[c_.job_pred[i]] : 0;
      for (int k = i; k >= 0; k = c_.job_succ[k]) {
        seen[k] = 1;
        Time s = std::max({t, c_.base_ready[k], last_start});
        t = s + min_dur_[k];
        lb = add_cost(lb, k, s, t);
      }
    }
    return lb;
  }

  void dfs(int placed, Time last_start, Time cost) {
    if (placed == c_.n) {
      if (cost < best_) {
        best_ = cost;
        best_machine_ = machine_;
        best_start_ = start_;
      }
      return;
    }
    if (lower_bound(cost, last_start) >= best_) return;
    for (int i = 0; i < c_.n; ++i) {
      if (done_[i] || (c_.job_pred[i] >= 0 && !done_[c_.job_pred[i]])) continue;
      Time ready = c_.base_ready[i];
      if (c_.job_pred[i] >= 0) ready = std::max(ready, end_[c_.job_pred[i]]);
      for (MachineId m : c_.allowed[i]) {
        Time s = std::max(ready, avail_[m]);
        if (s < last_start) continue;
        Time e = s + c_.duration(i, m);
        Time saved_avail = avail_[m];
        done_[i] = 1;
        start_[i] = s;
        end_[i] = e;
        machine_[i] = m;
        avail_[m] = e;
        dfs(placed + 1, s, add_cost(cost, i, s, e));
        avail_[m] = saved_avail;
        done_[i] = 0;
      }
    }
  }

  const detail::Compiled& c_;
  std::vector<char> done_;
  std::vector<Time> start_, end_;
  std::vector<MachineId> machine_;
  std::vector<Time> avail_;
  std::vector<Time> min_dur_;
  Time best_ = 0;
  std::vector<MachineId> best_machine_;
  std::vector<Time> best_start_;
};

}  // namespace

Solution exact_solve(const Subproblem& sub, int max_ops) {
  sub.validate();
  if (static_cast<int>(sub.plan_ops.size()) > max_ops)
    throw ConfigError("exact solver refuses " + std::to_string(sub.plan_ops.size()) + " ops (cap " +
                      std::to_string(max_ops) + ")");
  detail::Compiled c(sub);
  detail::Config cfg = detail::dispatch(c);
  detail::Decoder dec(c);
  std::vector<Time> start, end;
  dec.decode(cfg, start, end);
  BranchAndBound bb(c);
  bb.run(c.objective(start, end), cfg.machine, start);
  return bb.solution();
}

}  // namespace lrho
