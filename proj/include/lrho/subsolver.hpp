#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lrho/core.hpp"

namespace lrho {

// A windowed FJSP: the planning ops plus everything already decided outside the window.
struct Subproblem {
  const FjspInstance* instance = nullptr;  // non-owning; must outlive the subproblem
  std::vector<OpId> plan_ops;              // in RHO order
  ObjectiveKind objective = ObjectiveKind::Makespan;
  Boundary boundary;
  Time earliest_start = 0;  // no op may start earlier (re-optimization time under breakdowns)
  std::map<OpId, MachineId> fixed_assignment;
  std::set<MachineId> unavailable_machines;
  std::optional<DurationOverlay> duration_overlay;
  std::map<OpId, Placement> warm_start;  // hints, never constraints

  // Whole-instance subproblem with empty boundaries.
  static Subproblem whole(const FjspInstance& inst);

  const FjspInstance& inst() const;
  const DurationOverlay* overlay() const { return duration_overlay ? &*duration_overlay : nullptr; }
  Time duration(OpId op, MachineId m) const { return duration_of(inst(), op, m, overlay()); }
  // Fixed machine when the fix survives the availability mask, else compatible minus unavailable.
  std::vector<MachineId> allowed_machines(OpId op) const;
  void validate() const;
  FeasibilityOptions feasibility_options() const;
};

struct Budget {
  enum class Mode { WallClock, MoveCount };
  Mode mode = Mode::MoveCount;
  double limit_secs = 0.0;
  double stall_secs = 0.0;
  std::int64_t max_moves = 0;
  std::int64_t stall_moves = 0;

  static Budget wall_clock(double limit_secs, double stall_secs);
  static Budget move_count(std::int64_t max_moves, std::int64_t stall_moves);
  void validate() const;
};

struct SolveStats {
  std::int64_t moves = 0;
  double seconds = 0.0;
  Time initial_objective = 0;
  Time best_objective = 0;
  int improvements = 0;
  std::vector<Time> trajectory;  // incumbent objective after each improvement, starting with the initial one
};

struct SolveResult {
  Solution solution;
  SolveStats stats;
};

// Semi-active decoding of an assignment plus per-machine processing orders.
// machine_sequences is indexed by machine id. Throws InfeasibleOrderError on cycles.
Solution schedule_from_order(const Subproblem& sub, const std::map<OpId, MachineId>& assignment,
                             const std::vector<std::vector<OpId>>& machine_sequences);

// Greedy list dispatching (earliest completion first).
Solution build_initial(const Subproblem& sub);

// Anytime local search from build_initial.
SolveResult solve(const Subproblem& sub, const Budget& budget, std::uint64_t seed);

// Optimal semi-active solution by depth-first branch and bound. Refuses windows above max_ops.
Solution exact_solve(const Subproblem& sub, int max_ops = 10);

Time subproblem_objective(const Subproblem& sub, const Solution& sol);

}  // namespace lrho
