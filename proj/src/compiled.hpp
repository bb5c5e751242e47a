#pragma once

// Dense, index-based view of a Subproblem shared by the search and the exact solver.

#include <vector>

#include "lrho/subsolver.hpp"

namespace lrho::detail {

struct Compiled {
  explicit Compiled(const Subproblem& sub);

  const Subproblem* sub;
  int n = 0;
  int num_machines = 0;
  ObjectiveKind kind = ObjectiveKind::Makespan;
  std::vector<OpId> ops;       // local -> global
  std::vector<int> local_of;   // global -> local, -1 outside the window
  std::vector<int> job_pred;   // local predecessor inside the window, or -1
  std::vector<int> job_succ;
  std::vector<Time> base_ready;     // max(release, executed job work, earliest_start)
  std::vector<Time> machine_ready;  // max(executed machine work, earliest_start)
  std::vector<Time> dur;            // n * num_machines; -1 when incompatible
  std::vector<std::vector<MachineId>> allowed;
  std::vector<Time> release;
  std::vector<Time> target;

  Time duration(int i, MachineId m) const { return dur[static_cast<std::size_t>(i * num_machines + m)]; }

  // Objective contribution bookkeeping.
  Time objective(const std::vector<Time>& start, const std::vector<Time>& end) const;
  Solution to_solution(const std::vector<MachineId>& machine, const std::vector<Time>& start) const;
};

// Assignment plus processing order of local ops on every machine.
struct Config {
  std::vector<MachineId> machine;
  std::vector<std::vector<int>> seq;
};

// Semi-active decoding by topological sweep over job and machine arcs.
class Decoder {
 public:
  explicit Decoder(const Compiled& c);
  // Returns false when the arcs contain a cycle.
  bool decode(const Config& cfg, std::vector<Time>& start, std::vector<Time>& end);

 private:
  const Compiled& c_;
  std::vector<int> mpred_, msucc_, indeg_, stack_;
};

// Greedy dispatch. Hinted ops are sequenced first on their hinted machines (when allowed), in hinted order.
Config dispatch(const Compiled& c);

}  // namespace lrho::detail
