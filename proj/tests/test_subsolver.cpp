#include "doctest.h"
#include "fixtures.hpp"
#include "lrho/subsolver.hpp"

using namespace lrho;
using fixtures::op;

namespace {

bool feasible(const Subproblem& sub, const Solution& s) {
  return check_feasibility(sub.inst(), s, sub.feasibility_options()).empty();
}

FjspInstance unit_chain(std::vector<Time> durs, std::vector<Time> releases = {}) {
  std::vector<Operation> job;
  for (std::size_t k = 0; k < durs.size(); ++k) {
    std::optional<Time> r = releases.empty() ? std::nullopt : std::optional<Time>(releases[k]);
    job.push_back(op(0, static_cast<int>(k) + 1, {{0, durs[k]}}, r, r ? std::optional<Time>(*r + 50) : std::nullopt));
  }
  return FjspInstance(1, {job}, releases.empty() ? ObjectiveKind::Makespan : ObjectiveKind::TotalStartDelay);
}

// 2 machines, 2 jobs x 2 ops, durations 1..4, releases 0..3: every optimum fits in a horizon of 20.
FjspInstance small_horizon(std::uint64_t seed, ObjectiveKind kind) {
  Rng rng(seed);
  std::vector<std::vector<Operation>> jobs(2);
  for (int j = 0; j < 2; ++j) {
    Time r = 0;
    for (int k = 1; k <= 2; ++k) {
      std::vector<MachineDuration> compat;
      for (MachineId m = 0; m < 2; ++m)
        if (rng.bernoulli(0.7)) compat.push_back({m, rng.uniform_int(1, 4)});
      if (compat.empty()) compat.push_back({static_cast<MachineId>(rng.uniform_int(0, 1)), rng.uniform_int(1, 4)});
      r += rng.uniform_int(0, 2);
      bool delay = kind != ObjectiveKind::Makespan;
      jobs[j].push_back(op(j, k, compat, delay ? std::optional<Time>(r) : std::nullopt,
                           delay ? std::optional<Time>(r + 5) : std::nullopt));
    }
  }
  return FjspInstance(2, jobs, kind);
}

}  // namespace

TEST_CASE("semi-active decoding") {
  FjspInstance chain = unit_chain({3, 4});
  Subproblem sub = Subproblem::whole(chain);
  Solution s = schedule_from_order(sub, {{0, 0}, {1, 0}}, {{0, 1}});
  CHECK(s.start(0) == 0);
  CHECK(s.start(1) == 3);

  sub.boundary.prev_machine_end[0] = 10;
  Solution shifted = schedule_from_order(sub, {{0, 0}, {1, 0}}, {{0, 1}});
  CHECK(shifted.start(0) == 10);
  CHECK(shifted.start(1) == 13);

  std::vector<std::vector<Operation>> jobs{{op(0, 1, {{0, 2}}, 0, 9)}, {op(1, 1, {{0, 3}}, 7, 9)}};
  FjspInstance rel(1, jobs, ObjectiveKind::TotalStartDelay);
  Subproblem rs = Subproblem::whole(rel);
  Solution r = schedule_from_order(rs, {{0, 0}, {1, 0}}, {{0, 1}});
  CHECK(r.start(1) == 7);

  FjspInstance two = unit_chain({1, 1});
  Subproblem cyc = Subproblem::whole(two);
  CHECK_THROWS_AS(schedule_from_order(cyc, {{0, 0}, {1, 0}}, {{1, 0}}), InfeasibleOrderError);
}

TEST_CASE("greedy dispatch") {
  FjspInstance chain = unit_chain({3, 4, 2});
  Subproblem sub = Subproblem::whole(chain);
  CHECK(build_initial(sub) == schedule_from_order(sub, {{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}));

  Subproblem empty = sub;
  empty.plan_ops.clear();
  CHECK(build_initial(empty).count() == 0);

  FjspInstance t1 = fixtures::t1();
  Subproblem whole = Subproblem::whole(t1);
  Solution init = build_initial(whole);
  CHECK(feasible(whole, init));
  CHECK(subproblem_objective(whole, init) >= subproblem_objective(whole, exact_solve(whole)));
}

TEST_CASE("warm-start hints seed the dispatch") {
  FjspInstance inst = gen_makespan_instance(3, 3, 3, 3);
  Subproblem sub = Subproblem::whole(inst);
  Solution best = exact_solve(sub);
  for (OpId o = 0; o < inst.num_ops(); ++o) sub.warm_start[o] = *best.at(o);
  Solution seeded = build_initial(sub);
  CHECK(feasible(sub, seeded));
  for (OpId o = 0; o < inst.num_ops(); ++o) CHECK(seeded.machine(o) == best.machine(o));
  CHECK(subproblem_objective(sub, seeded) <= subproblem_objective(sub, best));
}

TEST_CASE("zero budget returns the dispatch") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FjspInstance inst = gen_makespan_instance(seed, 4, 5, 5);
    Subproblem sub = Subproblem::whole(inst);
    SolveResult r = solve(sub, Budget::move_count(0, 0), seed);
    CHECK(r.solution == build_initial(sub));
    CHECK(r.stats.moves == 0);
  }
}

TEST_CASE("single-machine forced instance has nothing to improve") {
  std::vector<std::vector<Operation>> jobs{{op(0, 1, {{0, 3}})}, {op(1, 1, {{1, 4}})}, {op(2, 1, {{2, 2}})}};
  FjspInstance inst(3, jobs, ObjectiveKind::Makespan);
  Subproblem sub = Subproblem::whole(inst);
  Solution forced = schedule_from_order(sub, {{0, 0}, {1, 1}, {2, 2}}, {{0}, {1}, {2}});
  CHECK(solve(sub, Budget::move_count(1000, 500), 1).solution == forced);
}

TEST_CASE("local search contracts") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    FjspInstance inst = seed % 2 ? gen_delay_instance(seed, 4, 6, 5, seed % 4 == 1 ? ObjectiveKind::TotalStartDelay
                                                                                       : ObjectiveKind::StartPlusEndDelay)
                                 : gen_makespan_instance(seed, 4, 6, 5);
    Subproblem sub = Subproblem::whole(inst);
    Budget b = Budget::move_count(20000, 5000);
    SolveResult r = solve(sub, b, seed);
    CHECK(feasible(sub, r.solution));
    CHECK(r.stats.best_objective == subproblem_objective(sub, r.solution));
    CHECK(r.stats.best_objective <= r.stats.initial_objective);
    CHECK(r.stats.initial_objective == subproblem_objective(sub, build_initial(sub)));
    CHECK(r.stats.moves <= b.max_moves);
    for (std::size_t i = 1; i < r.stats.trajectory.size(); ++i) CHECK(r.stats.trajectory[i] < r.stats.trajectory[i - 1]);
    SolveResult again = solve(sub, b, seed);
    CHECK(again.solution == r.solution);
    CHECK(again.stats.moves == r.stats.moves);
  }
}

TEST_CASE("subproblem restrictions are respected") {
  FjspInstance inst = gen_delay_instance(8, 4, 5, 6);
  Subproblem sub;
  sub.instance = &inst;
  sub.objective = inst.objective();
  std::vector<OpId> order = rho_order(inst);
  sub.plan_ops.assign(order.begin() + 6, order.begin() + 20);
  for (OpId o : std::vector<OpId>(order.begin(), order.begin() + 6)) {
    sub.boundary.prev_job_end[inst.op(o).job_id] = 40;
  }
  sub.boundary.prev_machine_end[0] = 60;
  sub.boundary.prev_machine_end[2] = 35;
  sub.earliest_start = 30;
  sub.unavailable_machines = {1};
  sub.fixed_assignment[sub.plan_ops[0]] = 3;
  sub.fixed_assignment[sub.plan_ops[1]] = 1;  // dropped: machine down
  DurationOverlay overlay;
  for (OpId o : sub.plan_ops) {
    std::vector<Time> d;
    for (const auto& md : inst.op(o).compatible) d.push_back(md.duration + 2);
    overlay[o] = d;
  }
  sub.duration_overlay = overlay;
  CHECK(sub.allowed_machines(sub.plan_ops[1]) == std::vector<MachineId>{0, 2, 3});
  for (auto b : {Budget::move_count(0, 0), Budget::move_count(20000, 5000)}) {
    Solution s = solve(sub, b, 3).solution;
    CHECK(feasible(sub, s));
    CHECK(s.machine(sub.plan_ops[0]) == 3);
    for (OpId o : sub.plan_ops) {
      CHECK(s.start(o) >= 30);
      CHECK(s.machine(o) != 1);
    }
  }
}

TEST_CASE("subproblem validation") {
  FjspInstance inst = gen_makespan_instance(2, 3, 3, 3);
  Subproblem sub = Subproblem::whole(inst);
  sub.fixed_assignment[99] = 0;
  CHECK_THROWS_AS(sub.validate(), ConfigError);
  Subproblem dup = Subproblem::whole(inst);
  dup.plan_ops.push_back(dup.plan_ops.front());
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  CHECK_THROWS_AS(Budget::move_count(10, 20).validate(), ConfigError);
  CHECK_THROWS_AS(Budget::wall_clock(0, 0).validate(), ConfigError);
}

TEST_CASE("exact solver small cases") {
  std::vector<std::vector<Operation>> jobs{{op(0, 1, {{0, 4}, {1, 2}})}};
  FjspInstance one(2, jobs, ObjectiveKind::Makespan);
  Subproblem sub = Subproblem::whole(one);
  sub.boundary.prev_machine_end[1] = 3;
  Solution s = exact_solve(sub);
  CHECK(s.machine(0) == 0);  // m1 free only at 3, ending at 5 > 4
  sub.boundary.prev_machine_end.clear();
  CHECK(exact_solve(sub).machine(0) == 1);

  FjspInstance chain = unit_chain({2, 5, 4});
  CHECK(evaluate_objective(chain, exact_solve(Subproblem::whole(chain))) == 11);

  FjspInstance big = gen_makespan_instance(1, 3, 4, 4);
  CHECK_THROWS_AS(exact_solve(Subproblem::whole(big)), ConfigError);
}

TEST_CASE("exact solver matches exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    FjspInstance inst = fixtures::tiny(seed);
    Solution s = exact_solve(Subproblem::whole(inst));
    CHECK(check_feasibility(inst, s).empty());
    CHECK(evaluate_objective(inst, s) == fixtures::brute_force_optimum(inst));
  }
}

TEST_CASE("semi-active optimum equals the optimum over all integer start times") {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (auto kind : {ObjectiveKind::Makespan, ObjectiveKind::TotalStartDelay}) {
      FjspInstance inst = small_horizon(seed, kind);
      Solution s = exact_solve(Subproblem::whole(inst));
      CHECK(evaluate_objective(inst, s) == fixtures::start_time_optimum(inst, 20));
    }
}

TEST_CASE("restricting assignments never improves the optimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FjspInstance inst = fixtures::tiny(seed);
    Subproblem free = Subproblem::whole(inst);
    Time best = subproblem_objective(free, exact_solve(free));
    Rng rng(seed);
    Subproblem fixed = free;
    for (OpId o : fixed.plan_ops)
      if (rng.bernoulli(0.5)) {
        const auto& c = inst.op(o).compatible;
        fixed.fixed_assignment[o] = c[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(c.size()) - 1))].machine;
      }
    Solution r = exact_solve(fixed);
    CHECK(feasible(fixed, r));
    CHECK(subproblem_objective(fixed, r) >= best);
  }
}

TEST_CASE("local search reaches the optimum on small fixtures") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FjspInstance inst = fixtures::tiny(seed);
    Subproblem sub = Subproblem::whole(inst);
    Time opt = subproblem_objective(sub, exact_solve(sub));
    Time got = solve(sub, Budget::move_count(20000, 5000), seed).stats.best_objective;
    CHECK(got >= opt);
    CHECK(got <= opt * 1.1 + 1e-9);
    hits += got == opt;
  }
  CHECK(hits >= 18);
}
