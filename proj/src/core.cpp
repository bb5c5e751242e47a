#include "lrho/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace lrho {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Makespan:
      return "makespan";
    case ObjectiveKind::TotalStartDelay:
      return "start_delay";
    case ObjectiveKind::StartPlusEndDelay:
      return "start_end_delay";
  }
  return "?";
}

ObjectiveKind objective_from_string(std::string_view name) {
  if (name == "makespan") return ObjectiveKind::Makespan;
  if (name == "start_delay") return ObjectiveKind::TotalStartDelay;
  if (name == "start_end_delay") return ObjectiveKind::StartPlusEndDelay;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

std::optional<Time> Operation::duration_on(MachineId m) const {
  auto it = std::lower_bound(compatible.begin(), compatible.end(), m,
                             [](const MachineDuration& md, MachineId x) { return md.machine < x; });
  if (it == compatible.end() || it->machine != m) return std::nullopt;
  return it->duration;
}

FjspInstance::FjspInstance(int num_machines, std::vector<std::vector<Operation>> jobs, ObjectiveKind objective,
                           std::uint64_t seed)
    : num_machines_(num_machines), objective_(objective), seed_(seed) {
  if (num_machines < 1) throw ConfigError("instance needs at least one machine");
  if (jobs.empty()) throw ConfigError("instance needs at least one job");
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto& job = jobs[j];
    if (job.empty()) throw ConfigError("job " + std::to_string(j) + " is empty");
    for (std::size_t k = 0; k < job.size(); ++k) {
      Operation op = std::move(job[k]);
      op.job_id = static_cast<int>(j);
      op.op_index = static_cast<int>(k) + 1;
      if (op.compatible.empty())
        throw ConfigError("operation (" + std::to_string(j) + "," + std::to_string(k + 1) + ") has no machine");
      std::sort(op.compatible.begin(), op.compatible.end(),
                [](const MachineDuration& a, const MachineDuration& b) { return a.machine < b.machine; });
      for (std::size_t i = 0; i < op.compatible.size(); ++i) {
        const auto& md = op.compatible[i];
        if (md.machine < 0 || md.machine >= num_machines) throw ConfigError("machine index out of range");
        if (md.duration < 1) throw ConfigError("durations must be >= 1");
        if (i > 0 && op.compatible[i - 1].machine == md.machine) throw ConfigError("duplicate compatible machine");
      }
      if (op.release_time && *op.release_time < 0) throw ConfigError("negative release time");
      if (op.target_end_time && *op.target_end_time < 0) throw ConfigError("negative target end time");
      if (k > 0 && op.release_time && ops_.back().release_time && *op.release_time < *ops_.back().release_time)
        throw ConfigError("release times must be nondecreasing within a job");
      ops_.push_back(std::move(op));
    }
    job_offset_.push_back(static_cast<int>(ops_.size()));
  }
}

std::span<const Operation> FjspInstance::job(int j) const {
  return std::span<const Operation>(ops_).subspan(static_cast<std::size_t>(job_offset_.at(j)),
                                                  static_cast<std::size_t>(job_length(j)));
}

bool FjspInstance::has_release_times() const {
  return std::all_of(ops_.begin(), ops_.end(), [](const Operation& o) { return o.release_time.has_value(); });
}

bool FjspInstance::has_target_times() const {
  return std::all_of(ops_.begin(), ops_.end(), [](const Operation& o) { return o.target_end_time.has_value(); });
}

FjspInstance FjspInstance::with_objective(ObjectiveKind kind) const {
  FjspInstance copy = *this;
  copy.objective_ = kind;
  return copy;
}

std::vector<std::vector<Operation>> FjspInstance::jobs() const {
  std::vector<std::vector<Operation>> out;
  for (int j = 0; j < num_jobs(); ++j) {
    auto span = job(j);
    out.emplace_back(span.begin(), span.end());
  }
  return out;
}

Time duration_of(const FjspInstance& inst, OpId op, MachineId m, const DurationOverlay* overlay) {
  const Operation& o = inst.op(op);
  if (overlay) {
    if (auto it = overlay->find(op); it != overlay->end()) {
      for (std::size_t i = 0; i < o.compatible.size(); ++i)
        if (o.compatible[i].machine == m) return it->second.at(i);
      throw ConfigError("machine " + std::to_string(m) + " not compatible with op " + std::to_string(op));
    }
  }
  auto d = o.duration_on(m);
  if (!d) throw ConfigError("machine " + std::to_string(m) + " not compatible with op " + std::to_string(op));
  return *d;
}

MachineId Solution::machine(OpId op) const {
  const auto& slot = at(op);
  if (!slot) throw IncompleteSolutionError("operation " + std::to_string(op) + " is unassigned");
  return slot->machine;
}

Time Solution::start(OpId op) const {
  const auto& slot = at(op);
  if (!slot) throw IncompleteSolutionError("operation " + std::to_string(op) + " has no start time");
  return slot->start;
}

int Solution::count() const {
  return static_cast<int>(std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.has_value(); }));
}

std::vector<OpId> Solution::assigned_ops() const {
  std::vector<OpId> out;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i]) out.push_back(static_cast<OpId>(i));
  return out;
}

Time end_time(const FjspInstance& inst, const Solution& sol, OpId op, const DurationOverlay* overlay) {
  return sol.start(op) + duration_of(inst, op, sol.machine(op), overlay);
}

void require_objective_data(const FjspInstance& inst, ObjectiveKind kind) {
  if (kind != ObjectiveKind::Makespan && !inst.has_release_times())
    throw ConfigError("delay objective requires release times on every operation");
  if (kind == ObjectiveKind::StartPlusEndDelay && !inst.has_target_times())
    throw ConfigError("start+end delay objective requires target end times on every operation");
}

Time evaluate_objective(const FjspInstance& inst, const Solution& sol, std::span<const OpId> ops, ObjectiveKind kind,
                        const DurationOverlay* overlay) {
  require_objective_data(inst, kind);
  Time value = 0;
  for (OpId id : ops) {
    if (!sol.has(id)) throw IncompleteSolutionError("operation " + std::to_string(id) + " missing from solution");
    const Operation& o = inst.op(id);
    Time start = sol.start(id);
    Time end = start + duration_of(inst, id, sol.machine(id), overlay);
    switch (kind) {
      case ObjectiveKind::Makespan:
        value = std::max(value, end);
        break;
      case ObjectiveKind::TotalStartDelay:
        value += start - *o.release_time;
        break;
      case ObjectiveKind::StartPlusEndDelay:
        value += start - *o.release_time + std::max<Time>(end - *o.target_end_time, 0);
        break;
    }
  }
  return value;
}

Time evaluate_objective(const FjspInstance& inst, const Solution& sol, const DurationOverlay* overlay) {
  if (sol.size() != inst.num_ops()) throw IncompleteSolutionError("solution size does not match instance");
  std::vector<OpId> all(static_cast<std::size_t>(inst.num_ops()));
  std::iota(all.begin(), all.end(), 0);
  return evaluate_objective(inst, sol, all, inst.objective(), overlay);
}

Time Boundary::job_ready(int job) const {
  auto it = prev_job_end.find(job);
  return it == prev_job_end.end() ? 0 : it->second;
}

Time Boundary::machine_ready(MachineId m) const {
  auto it = prev_machine_end.find(m);
  return it == prev_machine_end.end() ? 0 : it->second;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Unassigned:
      return "Unassigned";
    case ViolationKind::IncompatibleMachine:
      return "IncompatibleMachine";
    case ViolationKind::PrecedenceViolation:
      return "PrecedenceViolation";
    case ViolationKind::MachineOverlap:
      return "MachineOverlap";
    case ViolationKind::ReleaseViolation:
      return "ReleaseViolation";
    case ViolationKind::JobBoundaryViolation:
      return "JobBoundaryViolation";
    case ViolationKind::MachineBoundaryViolation:
      return "MachineBoundaryViolation";
    case ViolationKind::MachineUnavailable:
      return "MachineUnavailable";
  }
  return "?";
}

std::vector<Violation> check_feasibility(const FjspInstance& inst, const Solution& sol,
                                         const FeasibilityOptions& options) {
  std::vector<Violation> out;
  std::vector<OpId> scope;
  if (options.scope) {
    scope = *options.scope;
  } else {
    scope.resize(static_cast<std::size_t>(inst.num_ops()));
    std::iota(scope.begin(), scope.end(), 0);
  }
  if (sol.size() != inst.num_ops()) {
    out.push_back({ViolationKind::Unassigned, -1, -1, "solution size does not match instance"});
    return out;
  }
  std::vector<char> in_scope(static_cast<std::size_t>(inst.num_ops()), 0);
  for (OpId id : scope) in_scope[static_cast<std::size_t>(id)] = 1;

  auto timed = [&](OpId id) {
    return sol.has(id) && inst.op(id).can_run_on(sol.machine(id));
  };
  std::map<MachineId, std::vector<OpId>> by_machine;
  for (OpId id : scope) {
    if (!sol.has(id)) {
      out.push_back({ViolationKind::Unassigned, id, -1, "no machine or start time"});
      continue;
    }
    const Operation& o = inst.op(id);
    Placement p = *sol.at(id);
    if (!o.can_run_on(p.machine)) {
      out.push_back({ViolationKind::IncompatibleMachine, id, -1, "machine " + std::to_string(p.machine)});
      continue;
    }
    if (o.release_time && p.start < *o.release_time)
      out.push_back({ViolationKind::ReleaseViolation, id, -1,
                     "start " + std::to_string(p.start) + " < release " + std::to_string(*o.release_time)});
    if (options.unavailable.count(p.machine))
      out.push_back({ViolationKind::MachineUnavailable, id, -1, "machine " + std::to_string(p.machine)});
    if (options.boundary) {
      if (p.start < options.boundary->job_ready(o.job_id))
        out.push_back({ViolationKind::JobBoundaryViolation, id, -1, "starts before executed job work ends"});
      if (p.start < options.boundary->machine_ready(p.machine))
        out.push_back({ViolationKind::MachineBoundaryViolation, id, -1, "starts before executed machine work ends"});
    }
    by_machine[p.machine].push_back(id);

    OpId pred = inst.job_predecessor(id);
    if (pred >= 0 && in_scope[static_cast<std::size_t>(pred)] && timed(pred)) {
      Time pred_end = end_time(inst, sol, pred, options.overlay);
      if (pred_end > p.start)
        out.push_back({ViolationKind::PrecedenceViolation, id, pred,
                       "predecessor ends " + std::to_string(pred_end) + " after start " + std::to_string(p.start)});
    }
  }
  for (auto& [m, ids] : by_machine) {
    std::sort(ids.begin(), ids.end(), [&](OpId a, OpId b) {
      return std::pair(sol.start(a), a) < std::pair(sol.start(b), b);
    });
    OpId latest = -1;
    Time latest_end = 0;
    for (OpId id : ids) {
      if (latest >= 0 && latest_end > sol.start(id))
        out.push_back({ViolationKind::MachineOverlap, id, latest, "machine " + std::to_string(m)});
      Time e = end_time(inst, sol, id, options.overlay);
      if (latest < 0 || e > latest_end) {
        latest = id;
        latest_end = e;
      }
    }
  }
  return out;
}

std::vector<OpId> rho_order(const FjspInstance& inst, ObjectiveKind kind) {
  std::vector<OpId> order(static_cast<std::size_t>(inst.num_ops()));
  std::iota(order.begin(), order.end(), 0);
  if (kind == ObjectiveKind::Makespan) {
    // Score k / n_j compared exactly by cross multiplication.
    std::stable_sort(order.begin(), order.end(), [&](OpId a, OpId b) {
      const Operation& oa = inst.op(a);
      const Operation& ob = inst.op(b);
      std::int64_t lhs = std::int64_t{oa.op_index} * inst.job_length(ob.job_id);
      std::int64_t rhs = std::int64_t{ob.op_index} * inst.job_length(oa.job_id);
      if (lhs != rhs) return lhs < rhs;
      return std::pair(oa.job_id, oa.op_index) < std::pair(ob.job_id, ob.op_index);
    });
  } else {
    if (!inst.has_release_times()) throw ConfigError("release-time ordering needs release times");
    std::stable_sort(order.begin(), order.end(), [&](OpId a, OpId b) {
      const Operation& oa = inst.op(a);
      const Operation& ob = inst.op(b);
      return std::tuple(*oa.release_time, oa.job_id, oa.op_index) <
             std::tuple(*ob.release_time, ob.job_id, ob.op_index);
    });
  }
  return order;
}

std::vector<OpId> rho_order(const FjspInstance& inst) { return rho_order(inst, inst.objective()); }

Improvement improvement_metrics(const RunReport& base, const RunReport& other) {
  if (base.objective <= 0) throw UndefinedMetricError("base objective must be positive for OI%");
  if (base.solve_time <= 0.0) throw UndefinedMetricError("base time must be positive for TI%");
  Improvement imp;
  imp.oi_percent = static_cast<double>(base.objective - other.objective) / static_cast<double>(base.objective) * 100.0;
  imp.ti_percent = (base.solve_time - other.solve_time) / base.solve_time * 100.0;
  return imp;
}

}  // namespace lrho
