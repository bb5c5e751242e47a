#include "lrho/subsolver.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <optional>

#include "compiled.hpp"
#include "lrho/rng.hpp"

namespace lrho {

Subproblem Subproblem::whole(const FjspInstance& inst) {
  Subproblem sub;
  sub.instance = &inst;
  sub.plan_ops = rho_order(inst);
  sub.objective = inst.objective();
  return sub;
}

const FjspInstance& Subproblem::inst() const {
  if (!instance) throw ConfigError("subproblem has no instance");
  return *instance;
}

std::vector<MachineId> Subproblem::allowed_machines(OpId op) const {
  if (auto it = fixed_assignment.find(op); it != fixed_assignment.end() && !unavailable_machines.count(it->second))
    return {it->second};
  std::vector<MachineId> out;
  for (const auto& md : inst().op(op).compatible)
    if (!unavailable_machines.count(md.machine)) out.push_back(md.machine);
  return out;
}

void Subproblem::validate() const {
  const FjspInstance& in = inst();
  require_objective_data(in, objective);
  std::set<OpId> seen;
  for (OpId op : plan_ops) {
    if (op < 0 || op >= in.num_ops()) throw ConfigError("plan op out of range");
    if (!seen.insert(op).second) throw ConfigError("duplicate plan op");
    if (allowed_machines(op).empty())
      throw ConfigError("operation " + std::to_string(op) + " has no available machine");
  }
  for (const auto& [op, m] : fixed_assignment) {
    if (!seen.count(op)) throw ConfigError("fixed op outside the planning window");
    if (!in.op(op).can_run_on(m)) throw ConfigError("fixed machine is not compatible");
  }
  if (duration_overlay)
    for (const auto& [op, ds] : *duration_overlay)
      if (ds.size() != in.op(op).compatible.size()) throw ConfigError("overlay shape mismatch");
}

FeasibilityOptions Subproblem::feasibility_options() const {
  FeasibilityOptions opt;
  opt.scope = plan_ops;
  opt.boundary = &boundary;
  opt.overlay = overlay();
  opt.unavailable = unavailable_machines;
  return opt;
}

Budget Budget::wall_clock(double limit_secs, double stall_secs) {
  Budget b;
  b.mode = Mode::WallClock;
  b.limit_secs = limit_secs;
  b.stall_secs = stall_secs;
  return b;
}

Budget Budget::move_count(std::int64_t max_moves, std::int64_t stall_moves) {
  Budget b;
  b.mode = Mode::MoveCount;
  b.max_moves = max_moves;
  b.stall_moves = stall_moves;
  return b;
}

void Budget::validate() const {
  if (mode == Mode::WallClock) {
    if (limit_secs <= 0 || stall_secs <= 0 || stall_secs > limit_secs)
      throw ConfigError("wall-clock budget needs 0 < stall <= limit");
  } else {
    if (max_moves < 0 || stall_moves < 0 || stall_moves > max_moves)
      throw ConfigError("move budget needs 0 <= stall <= limit");
  }
}

namespace detail {

Compiled::Compiled(const Subproblem& s) : sub(&s) {
  const FjspInstance& in = s.inst();
  n = static_cast<int>(s.plan_ops.size());
  num_machines = in.num_machines();
  kind = s.objective;
  ops = s.plan_ops;
  local_of.assign(static_cast<std::size_t>(in.num_ops()), -1);
  for (int i = 0; i < n; ++i) local_of[static_cast<std::size_t>(ops[i])] = i;
  job_pred.assign(n, -1);
  job_succ.assign(n, -1);
  base_ready.assign(n, 0);
  release.assign(n, 0);
  target.assign(n, 0);
  allowed.resize(n);
  dur.assign(static_cast<std::size_t>(n * num_machines), -1);
  for (int i = 0; i < n; ++i) {
    const Operation& o = in.op(ops[i]);
    OpId pred = in.job_predecessor(ops[i]);
    if (pred >= 0 && local_of[static_cast<std::size_t>(pred)] >= 0) {
      job_pred[i] = local_of[static_cast<std::size_t>(pred)];
      job_succ[job_pred[i]] = i;
    }
    release[i] = o.release_time.value_or(0);
    target[i] = o.target_end_time.value_or(0);
    base_ready[i] = std::max({o.release_time.value_or(0), s.boundary.job_ready(o.job_id), s.earliest_start});
    for (const auto& md : o.compatible)
      dur[static_cast<std::size_t>(i * num_machines + md.machine)] = s.duration(ops[i], md.machine);
    allowed[i] = s.allowed_machines(ops[i]);
  }
  machine_ready.assign(num_machines, 0);
  for (MachineId m = 0; m < num_machines; ++m)
    machine_ready[m] = std::max(s.boundary.machine_ready(m), s.earliest_start);
}

Time Compiled::objective(const std::vector<Time>& start, const std::vector<Time>& end) const {
  Time v = 0;
  switch (kind) {
    case ObjectiveKind::Makespan:
      for (int i = 0; i < n; ++i) v = std::max(v, end[i]);
      break;
    case ObjectiveKind::TotalStartDelay:
      for (int i = 0; i < n; ++i) v += start[i] - release[i];
      break;
    case ObjectiveKind::StartPlusEndDelay:
      for (int i = 0; i < n; ++i) v += start[i] - release[i] + std::max<Time>(end[i] - target[i], 0);
      break;
  }
  return v;
}

Solution Compiled::to_solution(const std::vector<MachineId>& machine, const std::vector<Time>& start) const {
  Solution sol(sub->inst().num_ops());
  for (int i = 0; i < n; ++i) sol.set(ops[i], {machine[i], start[i]});
  return sol;
}

Decoder::Decoder(const Compiled& c) : c_(c), mpred_(c.n), msucc_(c.n), indeg_(c.n) { stack_.reserve(c.n); }

bool Decoder::decode(const Config& cfg, std::vector<Time>& start, std::vector<Time>& end) {
  const int n = c_.n;
  start.resize(n);
  end.resize(n);
  for (const auto& seq : cfg.seq) {
    for (std::size_t k = 0; k < seq.size(); ++k) {
      mpred_[seq[k]] = k > 0 ? seq[k - 1] : -1;
      msucc_[seq[k]] = k + 1 < seq.size() ? seq[k + 1] : -1;
    }
  }
  stack_.clear();
  for (int i = 0; i < n; ++i) {
    indeg_[i] = (c_.job_pred[i] >= 0) + (mpred_[i] >= 0);
    if (indeg_[i] == 0) stack_.push_back(i);
  }
  int done = 0;
  while (!stack_.empty()) {
    int u = stack_.back();
    stack_.pop_back();
    ++done;
    MachineId m = cfg.machine[u];
    Time s = c_.base_ready[u];
    if (c_.job_pred[u] >= 0) s = std::max(s, end[c_.job_pred[u]]);
    s = std::max(s, mpred_[u] >= 0 ? end[mpred_[u]] : c_.machine_ready[m]);
    start[u] = s;
    end[u] = s + c_.duration(u, m);
    for (int v : {c_.job_succ[u], msucc_[u]})
      if (v >= 0 && --indeg_[v] == 0) stack_.push_back(v);
  }
  return done == n;
}

Config dispatch(const Compiled& c) {
  const Subproblem& sub = *c.sub;
  Config cfg;
  cfg.machine.assign(c.n, -1);
  cfg.seq.assign(c.num_machines, {});
  std::vector<Time> avail = c.machine_ready;
  std::vector<Time> end(c.n, 0);
  std::vector<char> done(c.n, 0);
  auto place = [&](int i, MachineId m, Time finish) {
    done[i] = 1;
    end[i] = finish;
    avail[m] = finish;
    cfg.machine[i] = m;
    cfg.seq[m].push_back(i);
  };
  auto ready_time = [&](int i) {
    Time ready = c.base_ready[i];
    if (c.job_pred[i] >= 0) ready = std::max(ready, end[c.job_pred[i]]);
    return ready;
  };
  auto pred_done = [&](int i) { return c.job_pred[i] < 0 || done[c.job_pred[i]]; };

  // Hinted ops first, on their hinted machines in hinted start order.
  std::vector<MachineId> hint_machine(c.n, -1);
  std::vector<Time> hint_start(c.n, 0);
  for (int i = 0; i < c.n; ++i) {
    auto hint = sub.warm_start.find(c.ops[i]);
    if (hint == sub.warm_start.end()) continue;
    if (std::find(c.allowed[i].begin(), c.allowed[i].end(), hint->second.machine) == c.allowed[i].end()) continue;
    hint_machine[i] = hint->second.machine;
    hint_start[i] = hint->second.start;
  }
  for (;;) {
    int pick = -1;
    for (int i = 0; i < c.n; ++i) {
      if (done[i] || hint_machine[i] < 0 || !pred_done(i)) continue;
      if (pick < 0 || hint_start[i] < hint_start[pick]) pick = i;
    }
    if (pick < 0) break;
    const MachineId m = hint_machine[pick];
    place(pick, m, std::max(ready_time(pick), avail[m]) + c.duration(pick, m));
  }

  // Then everything else greedily by earliest completion.
  for (;;) {
    int best_op = -1;
    MachineId best_m = -1;
    Time best_done = std::numeric_limits<Time>::max();
    for (int i = 0; i < c.n; ++i) {
      if (done[i] || !pred_done(i)) continue;
      const Time ready = ready_time(i);
      for (MachineId m : c.allowed[i]) {
        Time finish = std::max(ready, avail[m]) + c.duration(i, m);
        // Plan order is RHO order, so strict '<' keeps the earliest op and lowest machine on ties.
        if (finish < best_done) {
          best_done = finish;
          best_op = i;
          best_m = m;
        }
      }
    }
    if (best_op < 0) break;
    place(best_op, best_m, best_done);
  }
  return cfg;
}

}  // namespace detail

using detail::Compiled;
using detail::Config;
using detail::Decoder;

Solution schedule_from_order(const Subproblem& sub, const std::map<OpId, MachineId>& assignment,
                             const std::vector<std::vector<OpId>>& machine_sequences) {
  Compiled c(sub);
  Config cfg;
  cfg.machine.assign(c.n, -1);
  cfg.seq.assign(c.num_machines, {});
  if (static_cast<int>(machine_sequences.size()) > c.num_machines)
    throw ConfigError("more machine sequences than machines");
  std::vector<char> placed(c.n, 0);
  for (std::size_t m = 0; m < machine_sequences.size(); ++m) {
    for (OpId op : machine_sequences[m]) {
      int i = (op >= 0 && op < static_cast<OpId>(c.local_of.size())) ? c.local_of[op] : -1;
      if (i < 0) throw ConfigError("sequenced op is outside the planning window");
      if (placed[i]) throw ConfigError("op sequenced twice");
      auto it = assignment.find(op);
      if (it == assignment.end() || it->second != static_cast<MachineId>(m))
        throw ConfigError("machine sequence disagrees with the assignment");
      if (c.duration(i, static_cast<MachineId>(m)) < 0) throw ConfigError("assigned machine is not compatible");
      placed[i] = 1;
      cfg.machine[i] = static_cast<MachineId>(m);
      cfg.seq[m].push_back(i);
    }
  }
  if (std::find(placed.begin(), placed.end(), 0) != placed.end())
    throw ConfigError("machine sequences do not cover the planning window");
  Decoder dec(c);
  std::vector<Time> start, end;
  if (!dec.decode(cfg, start, end)) throw InfeasibleOrderError("machine sequences conflict with job precedence");
  return c.to_solution(cfg.machine, start);
}

Solution build_initial(const Subproblem& sub) {
  sub.validate();
  Compiled c(sub);
  Config cfg = detail::dispatch(c);
  Decoder dec(c);
  std::vector<Time> start, end;
  dec.decode(cfg, start, end);
  return c.to_solution(cfg.machine, start);
}

Time subproblem_objective(const Subproblem& sub, const Solution& sol) {
  return evaluate_objective(sub.inst(), sol, sub.plan_ops, sub.objective, sub.overlay());
}

namespace {

// Local search over (assignment, machine order) with semi-active decoding. The neighbourhood of a
// solution is every reinsertion of one op at another slot of an allowed machine (reassignment when
// the machine changes, relocation or adjacent swap otherwise). Descent is first-improvement over a
// random scan order; a descent ends at a local optimum once a full pass over the ops finds nothing.
class Search {
 public:
  // Failed kick-and-descend rounds from the incumbent before the search is considered converged.
  static constexpr int kMaxFailedRestarts = 30;
  static constexpr int kKickMoves = 2;

  Search(const Compiled& c, std::uint64_t seed) : c_(c), dec_(c), rng_(seed) {}

  SolveResult run(const Budget& budget) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    SolveResult result;
    cur_ = detail::dispatch(c_);
    dec_.decode(cur_, cur_start_, cur_end_);
    Time cur_obj = c_.objective(cur_start_, cur_end_);
    Config best = cur_;
    std::vector<Time> best_start = cur_start_;
    Time best_obj = cur_obj;
    result.stats.initial_objective = cur_obj;
    result.stats.trajectory.push_back(cur_obj);

    const bool by_moves = budget.mode == Budget::Mode::MoveCount;
    const std::int64_t restart_every = by_moves ? std::max<std::int64_t>(1, budget.stall_moves / 3) : 0;
    std::int64_t moves = 0, stall = 0, since_restart = 0;
    double last_improve = 0.0, last_restart = 0.0, elapsed = 0.0;
    int clean = 0, failed_restarts = 0;

    auto exhausted = [&]() {
      if (by_moves) return moves >= budget.max_moves || stall >= budget.stall_moves;
      elapsed = std::chrono::duration<double>(clock::now() - t0).count();
      return elapsed >= budget.limit_secs || elapsed - last_improve >= budget.stall_secs;
    };
    auto restart = [&]() {
      cur_ = best;
      dec_.decode(cur_, cur_start_, cur_end_);
      cur_obj = best_obj;
      for (int k = 0; k < kKickMoves && !exhausted(); ++k) {
        ++moves;
        ++stall;
        kick(cur_obj);
      }
      since_restart = 0;
      last_restart = elapsed;
      clean = 0;
      new_pass();
    };

    if (c_.n > 0) {
      new_pass();
      while (!exhausted()) {
        if (clean >= c_.n) {
          if (failed_restarts >= kMaxFailedRestarts) break;
          ++failed_restarts;
          restart();
          continue;
        }
        const int op = next_op();
        std::int64_t spent = 0;
        const bool improved = scan(op, cur_obj, by_moves ? budget.max_moves - moves : kNoCap, spent);
        moves += spent;
        if (improved) {
          clean = 0;
          new_pass();
        } else {
          ++clean;
        }
        if (improved && cur_obj < best_obj) {
          best_obj = cur_obj;
          best = cur_;
          best_start = cur_start_;
          ++result.stats.improvements;
          result.stats.trajectory.push_back(best_obj);
          stall = 0;
          since_restart = 0;
          failed_restarts = 0;
          last_improve = last_restart = elapsed;
          continue;
        }
        stall += spent;
        since_restart += spent;
        const bool due = by_moves ? since_restart >= restart_every : elapsed - last_restart >= budget.stall_secs / 3.0;
        if (due && !exhausted()) restart();
      }
    }
    result.stats.moves = moves;
    result.stats.best_objective = best_obj;
    result.stats.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    result.solution = c_.to_solution(best.machine, best_start);
    return result;
  }

 private:
  static constexpr std::int64_t kNoCap = std::numeric_limits<std::int64_t>::max();

  static std::size_t position_of(const std::vector<int>& seq, int op) {
    return static_cast<std::size_t>(std::find(seq.begin(), seq.end(), op) - seq.begin());
  }

  // Scan order for a fresh pass: ops held back by their machine first (only they can start earlier
  // by moving), then the rest, each group shuffled.
  void new_pass() {
    queue_.clear();
    std::vector<int> rest;
    for (int i = 0; i < c_.n; ++i) {
      Time ready = c_.base_ready[i];
      if (c_.job_pred[i] >= 0) ready = std::max(ready, cur_end_[c_.job_pred[i]]);
      (cur_start_[i] > ready ? queue_ : rest).push_back(i);
    }
    rng_.shuffle(queue_);
    rng_.shuffle(rest);
    queue_.insert(queue_.end(), rest.begin(), rest.end());
    std::reverse(queue_.begin(), queue_.end());  // consumed from the back
  }

  int next_op() {
    if (queue_.empty()) new_pass();
    int op = queue_.back();
    queue_.pop_back();
    return op;
  }

  // Removes op from its machine and inserts it at slot k of machine m (slots counted without op).
  void insert(int op, MachineId m, std::size_t k) {
    auto& from = cur_.seq[cur_.machine[op]];
    from.erase(from.begin() + static_cast<std::ptrdiff_t>(position_of(from, op)));
    auto& to = cur_.seq[m];
    to.insert(to.begin() + static_cast<std::ptrdiff_t>(k), op);
    cur_.machine[op] = m;
  }

  // Every insertion slot of op other than its current one.
  std::vector<std::pair<MachineId, std::size_t>> slots_of(int op) const {
    std::vector<std::pair<MachineId, std::size_t>> out;
    const MachineId from_m = cur_.machine[op];
    const std::size_t here = position_of(cur_.seq[from_m], op);
    for (MachineId m : c_.allowed[op]) {
      const std::size_t n = cur_.seq[m].size() + (m == from_m ? 0 : 1);
      for (std::size_t k = 0; k < n; ++k)
        if (m != from_m || k != here) out.emplace_back(m, k);
    }
    return out;
  }

  // Tries op's slots in random order and keeps the first strict improvement. Each evaluated slot is
  // one move; at most cap slots are tried.
  bool scan(int op, Time& cur_obj, std::int64_t cap, std::int64_t& spent) {
    spent = 0;
    const MachineId from_m = cur_.machine[op];
    const std::size_t from_pos = position_of(cur_.seq[from_m], op);
    auto slots = slots_of(op);
    rng_.shuffle(slots);
    for (auto [m, k] : slots) {
      if (spent >= cap) break;
      ++spent;
      insert(op, m, k);
      if (dec_.decode(cur_, trial_start_, trial_end_)) {
        const Time obj = c_.objective(trial_start_, trial_end_);
        if (obj < cur_obj) {
          cur_obj = obj;
          std::swap(cur_start_, trial_start_);
          std::swap(cur_end_, trial_end_);
          return true;
        }
      }
      insert(op, from_m, from_pos);
    }
    return false;
  }

  // One random acyclic reinsertion regardless of objective.
  void kick(Time& cur_obj) {
    const int op = static_cast<int>(rng_.uniform_int(0, c_.n - 1));
    auto slots = slots_of(op);
    if (slots.empty()) return;
    const MachineId from_m = cur_.machine[op];
    const std::size_t from_pos = position_of(cur_.seq[from_m], op);
    auto [m, k] = slots[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(slots.size()) - 1))];
    insert(op, m, k);
    if (dec_.decode(cur_, trial_start_, trial_end_)) {
      cur_obj = c_.objective(trial_start_, trial_end_);
      std::swap(cur_start_, trial_start_);
      std::swap(cur_end_, trial_end_);
    } else {
      insert(op, from_m, from_pos);
    }
  }

  const Compiled& c_;
  Decoder dec_;
  Rng rng_;
  Config cur_;
  std::vector<Time> cur_start_, cur_end_, trial_start_, trial_end_;
  std::vector<int> queue_;
};

}  // namespace

SolveResult solve(const Subproblem& sub, const Budget& budget, std::uint64_t seed) {
  sub.validate();
  budget.validate();
  Compiled c(sub);
  Search search(c, seed);
  return search.run(budget);
}

}  // namespace lrho
