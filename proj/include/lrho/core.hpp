#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lrho {

using Time = std::int64_t;
using OpId = std::int32_t;  // flat index into FjspInstance operations
using MachineId = std::int32_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IncompleteSolutionError : Error {
  using Error::Error;
};
struct UndefinedMetricError : Error {
  using Error::Error;
};
struct InfeasibleOrderError : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};

enum class ObjectiveKind { Makespan, TotalStartDelay, StartPlusEndDelay };

std::string_view to_string(ObjectiveKind kind);
ObjectiveKind objective_from_string(std::string_view name);
inline bool is_delay_objective(ObjectiveKind kind) { return kind != ObjectiveKind::Makespan; }

struct MachineDuration {
  MachineId machine = 0;
  Time duration = 1;
  friend bool operator==(const MachineDuration&, const MachineDuration&) = default;
};

struct Operation {
  int job_id = 0;    // 0-based job index
  int op_index = 1;  // 1-based position within the job
  std::vector<MachineDuration> compatible;  // sorted by machine, unique
  std::optional<Time> release_time;
  std::optional<Time> target_end_time;

  std::optional<Time> duration_on(MachineId m) const;
  bool can_run_on(MachineId m) const { return duration_on(m).has_value(); }

  friend bool operator==(const Operation&, const Operation&) = default;
};

class FjspInstance {
 public:
  FjspInstance() = default;
  // Validates every invariant; throws ConfigError on violation.
  FjspInstance(int num_machines, std::vector<std::vector<Operation>> jobs, ObjectiveKind objective,
               std::uint64_t seed = 0);

  int num_machines() const { return num_machines_; }
  int num_jobs() const { return static_cast<int>(job_offset_.size()) - 1; }
  int num_ops() const { return static_cast<int>(ops_.size()); }
  int job_length(int job) const { return job_offset_[job + 1] - job_offset_[job]; }

  const Operation& op(OpId id) const { return ops_.at(static_cast<std::size_t>(id)); }
  std::span<const Operation> ops() const { return ops_; }
  std::span<const Operation> job(int j) const;
  // k is 1-based.
  OpId op_id(int job, int k) const { return job_offset_.at(job) + k - 1; }
  // Previous op of the same job, or -1 for the first op.
  OpId job_predecessor(OpId id) const { return op(id).op_index > 1 ? id - 1 : -1; }

  ObjectiveKind objective() const { return objective_; }
  std::uint64_t seed() const { return seed_; }
  bool has_release_times() const;
  bool has_target_times() const;

  FjspInstance with_objective(ObjectiveKind kind) const;
  std::vector<std::vector<Operation>> jobs() const;

  friend bool operator==(const FjspInstance&, const FjspInstance&) = default;

 private:
  int num_machines_ = 0;
  std::vector<Operation> ops_;
  std::vector<int> job_offset_{0};
  ObjectiveKind objective_ = ObjectiveKind::Makespan;
  std::uint64_t seed_ = 0;
};

// Observed durations per op, parallel to Operation::compatible.
using DurationOverlay = std::map<OpId, std::vector<Time>>;

Time duration_of(const FjspInstance& inst, OpId op, MachineId m, const DurationOverlay* overlay = nullptr);

struct Placement {
  MachineId machine = 0;
  Time start = 0;
  friend auto operator<=>(const Placement&, const Placement&) = default;
};

// Machine assignment and start time per operation. End times are always derived.
class Solution {
 public:
  Solution() = default;
  explicit Solution(int num_ops) : slots_(static_cast<std::size_t>(num_ops)) {}

  int size() const { return static_cast<int>(slots_.size()); }
  bool has(OpId op) const { return slots_.at(static_cast<std::size_t>(op)).has_value(); }
  const std::optional<Placement>& at(OpId op) const { return slots_.at(static_cast<std::size_t>(op)); }
  void set(OpId op, Placement p) { slots_.at(static_cast<std::size_t>(op)) = p; }
  void clear(OpId op) { slots_.at(static_cast<std::size_t>(op)).reset(); }

  MachineId machine(OpId op) const;
  Time start(OpId op) const;
  int count() const;
  bool complete() const { return count() == size(); }
  std::vector<OpId> assigned_ops() const;

  friend bool operator==(const Solution&, const Solution&) = default;

 private:
  std::vector<std::optional<Placement>> slots_;
};

Time end_time(const FjspInstance& inst, const Solution& sol, OpId op, const DurationOverlay* overlay = nullptr);

// Objective of a complete solution under the instance's objective kind.
Time evaluate_objective(const FjspInstance& inst, const Solution& sol, const DurationOverlay* overlay = nullptr);
// Objective restricted to `ops` under an explicit kind (used for subproblems).
Time evaluate_objective(const FjspInstance& inst, const Solution& sol, std::span<const OpId> ops, ObjectiveKind kind,
                        const DurationOverlay* overlay = nullptr);
void require_objective_data(const FjspInstance& inst, ObjectiveKind kind);

struct Boundary {
  std::map<int, Time> prev_job_end;
  std::map<MachineId, Time> prev_machine_end;

  Time job_ready(int job) const;
  Time machine_ready(MachineId m) const;
  bool empty() const { return prev_job_end.empty() && prev_machine_end.empty(); }
  friend bool operator==(const Boundary&, const Boundary&) = default;
};

enum class ViolationKind {
  Unassigned,
  IncompatibleMachine,
  PrecedenceViolation,
  MachineOverlap,
  ReleaseViolation,
  JobBoundaryViolation,
  MachineBoundaryViolation,
  MachineUnavailable,
};
std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  OpId op = -1;
  OpId other = -1;
  std::string detail;
};

struct FeasibilityOptions {
  std::optional<std::vector<OpId>> scope;  // default: every operation
  const Boundary* boundary = nullptr;
  const DurationOverlay* overlay = nullptr;
  std::set<MachineId> unavailable;
};

// Violations are data: an empty list means feasible.
std::vector<Violation> check_feasibility(const FjspInstance& inst, const Solution& sol,
                                         const FeasibilityOptions& options = {});

// Global RHO sequence: relative job position for makespan, release time for delay objectives.
std::vector<OpId> rho_order(const FjspInstance& inst);
std::vector<OpId> rho_order(const FjspInstance& inst, ObjectiveKind kind);

struct IterationErrors {
  int iteration = 0;
  int fp = 0;
  int fn = 0;
  int overlap = 0;
  int oracle_size = 0;
};

struct RunReport {
  std::string method;
  double solve_time = 0.0;  // seconds or moves, see time_unit
  std::string time_unit = "moves";
  double wall_seconds = 0.0;
  Time objective = 0;
  std::optional<double> ti_percent;
  std::optional<double> oi_percent;
  int iterations = 0;
  std::vector<IterationErrors> errors;
};

struct Improvement {
  double oi_percent = 0.0;
  double ti_percent = 0.0;
};

// (obj0 - obj) / obj0 and (t0 - t) / t0, in percent. Negative values are degradations.
Improvement improvement_metrics(const RunReport& base, const RunReport& other);

}  // namespace lrho
