#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "lrho/core.hpp"

namespace lrho {

// Compatible-machine subsets of uniform size, durations U[1,99], no release times.
FjspInstance gen_makespan_instance(std::uint64_t seed, int num_machines, int num_jobs, int ops_per_job);

// All machines compatible, per-instance duration bounds, cumulative release times, targets.
FjspInstance gen_delay_instance(std::uint64_t seed, int num_machines, int num_jobs, int ops_per_job,
                                ObjectiveKind objective = ObjectiveKind::TotalStartDelay);

struct BreakdownIntensity {
  Time dur = 100;
  Time w_lb = 400;
  Time w_ub = 600;
  double p_b = 0.2;

  static BreakdownIntensity low() { return {100, 400, 600, 0.2}; }
  static BreakdownIntensity mid() { return {100, 175, 300, 0.35}; }
  static BreakdownIntensity high() { return {50, 100, 200, 0.5}; }
  static BreakdownIntensity from_name(std::string_view name);
};

struct BreakdownEvent {
  Time start = 0;
  Time duration = 0;
  std::set<MachineId> down_machines;
  Time end() const { return start + duration; }
  friend bool operator==(const BreakdownEvent&, const BreakdownEvent&) = default;
};

struct BreakdownSchedule {
  std::vector<BreakdownEvent> events;  // sorted by start, non-overlapping

  std::set<MachineId> down_at(Time t) const;
  // Earliest start or end of an event with a nonempty down set strictly after t.
  std::optional<Time> next_change_after(Time t) const;
  bool is_down_during(MachineId m, Time from, Time to) const;
  friend bool operator==(const BreakdownSchedule&, const BreakdownSchedule&) = default;
};

BreakdownSchedule gen_breakdowns(std::uint64_t seed, const BreakdownIntensity& intensity, Time horizon,
                                 int num_machines);

struct NoiseModel {
  double epsilon = 0.2;
  Time perturb_lo = -5;
  Time perturb_hi = 5;
  Time clip_lo = 3;
  Time clip_hi = 30;
};

// Observed durations for the planning window. The first clean_count ops are exact;
// each later op is perturbed with probability epsilon, independently per machine.
DurationOverlay observe_durations(const FjspInstance& inst, std::span<const OpId> plan_ops, int clean_count,
                                  std::uint64_t seed, const NoiseModel& noise);

}  // namespace lrho
