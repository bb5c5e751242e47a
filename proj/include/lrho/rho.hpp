#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lrho/core.hpp"
#include "lrho/gen.hpp"
#include "lrho/subsolver.hpp"

namespace lrho {

struct RhoParams {
  int H = 80;
  int S = 30;
  Budget budget = Budget::wall_clock(60.0, 3.0);

  void validate() const;
};

// Everything the fix-set strategies and the feature extractor may look at in iteration r.
struct RhoState {
  const FjspInstance* instance = nullptr;
  ObjectiveKind objective = ObjectiveKind::Makespan;
  int iteration = 0;  // 1-based
  std::vector<OpId> plan_ops;
  std::vector<OpId> overlap_ops;  // plan order
  std::vector<OpId> new_ops;
  std::vector<OpId> prev_plan_ops;
  Solution prev_solution;  // subproblem solution of iteration r-1 (its plan ops only)
  std::optional<DurationOverlay> prev_overlay;
  Solution executed;
  Boundary boundary;
  std::set<MachineId> down;
  std::set<MachineId> prev_down;
  std::optional<DurationOverlay> overlay;
  Time now = 0;

  const FjspInstance& inst() const { return *instance; }
  // Subproblem for the current window without any fixing.
  Subproblem subproblem() const;
};

// Probability that each overlap op (in state.overlap_ops order) can keep its previous machine.
class FixPredictor {
 public:
  virtual ~FixPredictor() = default;
  virtual std::vector<double> predict(const RhoState& state) const = 0;
};

struct FixStrategy {
  enum class Kind { Default, WarmStart, First, Random, Oracle, Learned };
  Kind kind = Kind::Default;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int q = 1;
  std::shared_ptr<const FixPredictor> model;
  double threshold = 0.5;

  static FixStrategy default_rho() { return {}; }
  static FixStrategy warm_start() { return make(Kind::WarmStart); }
  static FixStrategy first(double sigma) { return make(Kind::First, sigma); }
  static FixStrategy random(double sigma, std::uint64_t seed = 0) { return make(Kind::Random, sigma, seed); }
  static FixStrategy oracle(int q) { return make(Kind::Oracle, 0.0, 0, q); }
  static FixStrategy learned(std::shared_ptr<const FixPredictor> model, double threshold = 0.5);

  // "default", "warmstart", "first:0.3", "random:0.2", "oracle:5", "learned" (model attached separately).
  static FixStrategy parse(const std::string& text);
  std::string name() const;
  void validate() const;

 private:
  static FixStrategy make(Kind k, double sigma = 0.0, std::uint64_t seed = 0, int q = 1) {
    FixStrategy s;
    s.kind = k;
    s.sigma = sigma;
    s.seed = seed;
    s.q = q;
    return s;
  }
};

struct FixDecision {
  std::set<OpId> fix;
  // Present when the look-ahead oracle ran: its fix set and per-overlap-op labels.
  std::optional<std::set<OpId>> oracle_fix;
  std::vector<int> labels;
  int best_q = -1;
  std::int64_t oracle_moves = 0;
  double oracle_seconds = 0.0;
  double predict_seconds = 0.0;
};

// Unrestricted solve of the current window for oracle replicate q (0-based).
using SubsolveFn = std::function<SolveResult(int q)>;

std::vector<OpId> get_plan_operations(const FjspInstance& inst, const std::vector<OpId>& ordered_ops, int H,
                                      const Solution& executed, const std::set<MachineId>& down = {});

Boundary build_boundary(const FjspInstance& inst, const Solution& executed);

// Oracle labels: y = 1 iff the replicate's machine equals the previous one. Replicate with the
// most agreement wins, lowest index on ties.
FixDecision oracle_fix_set(const RhoState& state, int Q, const SubsolveFn& subsolve);

FixDecision select_fix_set(const FixStrategy& strategy, const RhoState& state, const SubsolveFn& subsolve,
                           std::uint64_t seed);

// First S ops by (start, position in plan). With next_event, commits only the prefix whose ops end
// by the event; the first op crossing it halts execution.
std::vector<OpId> get_step_operations(const std::vector<OpId>& plan_ops, int S, const Solution& solution,
                                      const FjspInstance& inst, const DurationOverlay* overlay = nullptr,
                                      std::optional<Time> next_event = std::nullopt);

// Commits step ops in planned-start order, lifting starts past machine and job availability
// under true durations. Returns the ops actually committed (a halt may cut the list short).
std::vector<OpId> execute_with_noise(const FjspInstance& inst, Solution& executed, const Solution& planned,
                                     const std::vector<OpId>& step_ops, std::optional<Time> next_event = std::nullopt);

struct IterationRecord {
  int iteration = 0;
  Time now = 0;
  int plan_size = 0;
  int overlap_size = 0;
  std::vector<OpId> fix_set;
  std::optional<std::vector<OpId>> oracle_fix;
  std::vector<int> labels;
  std::vector<OpId> committed;
  std::vector<Time> planned_starts;  // subproblem start of each committed op
  std::set<MachineId> down;
  Time sub_objective = 0;
  std::int64_t moves = 0;
  double seconds = 0.0;
  std::int64_t oracle_moves = 0;
  double oracle_seconds = 0.0;
};

struct RhoOptions {
  // Run a look-ahead oracle alongside any strategy to score its fix sets (not timed).
  int shadow_oracle_q = 0;
  // Count the oracle's unrestricted solves as solve effort (data collection).
  bool include_oracle_time = false;
  std::function<void(const RhoState&, const FixDecision&)> observer;
};

struct RhoResult {
  Solution solution;
  RunReport report;
  std::vector<IterationRecord> trace;
};

std::uint64_t iteration_solve_seed(std::uint64_t seed, int iteration);

RhoResult run_rho(const FjspInstance& inst, const RhoParams& params, const FixStrategy& strategy,
                  const BreakdownSchedule* events = nullptr, const NoiseModel* noise = nullptr, std::uint64_t seed = 0,
                  const RhoOptions& options = {});

}  // namespace lrho
