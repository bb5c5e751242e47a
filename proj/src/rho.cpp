#include "lrho/rho.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "lrho/rng.hpp"

namespace lrho {

void RhoParams::validate() const {
  if (S < 1 || S > H) throw ConfigError("RHO parameters need 1 <= S <= H");
  budget.validate();
}

Subproblem RhoState::subproblem() const {
  Subproblem sub;
  sub.instance = instance;
  sub.plan_ops = plan_ops;
  sub.objective = objective;
  sub.boundary = boundary;
  sub.earliest_start = now;
  sub.unavailable_machines = down;
  sub.duration_overlay = overlay;
  return sub;
}

FixStrategy FixStrategy::learned(std::shared_ptr<const FixPredictor> model, double threshold) {
  FixStrategy s;
  s.kind = Kind::Learned;
  s.model = std::move(model);
  s.threshold = threshold;
  return s;
}

FixStrategy FixStrategy::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&]() {
    if (arg.empty()) throw ConfigError("strategy '" + head + "' needs a parameter");
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size()) throw ConfigError("bad strategy parameter: " + arg);
    return v;
  };
  FixStrategy s;
  if (head == "default" && arg.empty()) s = default_rho();
  else if (head == "warmstart" && arg.empty()) s = warm_start();
  else if (head == "first") s = first(number());
  else if (head == "random") s = random(number());
  else if (head == "oracle") {
    double q = number();
    if (q != static_cast<int>(q)) throw ConfigError("oracle Q must be an integer");
    s = oracle(static_cast<int>(q));
  } else if (head == "learned") {
    s.kind = Kind::Learned;
    if (!arg.empty()) s.threshold = number();
  } else {
    throw ConfigError("unknown strategy: " + text);
  }
  if (s.kind != Kind::Learned) s.validate();
  return s;
}

std::string FixStrategy::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Default: return "default";
    case Kind::WarmStart: return "warmstart";
    case Kind::First: os << "first:" << sigma; break;
    case Kind::Random: os << "random:" << sigma; break;
    case Kind::Oracle: os << "oracle:" << q; break;
    case Kind::Learned: return "learned";
  }
  return os.str();
}

void FixStrategy::validate() const {
  if ((kind == Kind::First || kind == Kind::Random) && !(sigma >= 0.0 && sigma <= 1.0))
    throw ConfigError("sigma must lie in [0, 1]");
  if (kind == Kind::Oracle && q < 1) throw ConfigError("oracle needs Q >= 1");
  if (kind == Kind::Learned) {
    if (!model) throw ConfigError("learned strategy has no model loaded");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  }
}

std::vector<OpId> get_plan_operations(const FjspInstance& inst, const std::vector<OpId>& ordered_ops, int H,
                                      const Solution& executed, const std::set<MachineId>& down) {
  std::vector<OpId> plan;
  std::set<int> ignored_jobs;
  for (OpId op : ordered_ops) {
    if (static_cast<int>(plan.size()) >= H) break;
    if (executed.has(op)) continue;
    const Operation& o = inst.op(op);
    if (ignored_jobs.count(o.job_id)) continue;
    if (!down.empty() &&
        std::all_of(o.compatible.begin(), o.compatible.end(), [&](const auto& md) { return down.count(md.machine) > 0; })) {
      ignored_jobs.insert(o.job_id);
      continue;
    }
    plan.push_back(op);
  }
  return plan;
}

Boundary build_boundary(const FjspInstance& inst, const Solution& executed) {
  Boundary b;
  for (OpId op : executed.assigned_ops()) {
    Time e = end_time(inst, executed, op);
    int job = inst.op(op).job_id;
    MachineId m = executed.machine(op);
    b.prev_job_end[job] = std::max(b.prev_job_end.count(job) ? b.prev_job_end[job] : e, e);
    b.prev_machine_end[m] = std::max(b.prev_machine_end.count(m) ? b.prev_machine_end[m] : e, e);
  }
  return b;
}

FixDecision oracle_fix_set(const RhoState& state, int Q, const SubsolveFn& subsolve) {
  if (Q < 1) throw ConfigError("oracle needs Q >= 1");
  FixDecision d;
  int best_agree = -1;
  Solution best;
  for (int q = 0; q < Q; ++q) {
    SolveResult res = subsolve(q);
    d.oracle_moves += res.stats.moves;
    d.oracle_seconds += res.stats.seconds;
    int agree = 0;
    for (OpId op : state.overlap_ops)
      agree += res.solution.machine(op) == state.prev_solution.machine(op);
    if (agree > best_agree) {
      best_agree = agree;
      best = std::move(res.solution);
      d.best_q = q;
    }
  }
  std::set<OpId> fix;
  for (OpId op : state.overlap_ops) {
    int y = best.machine(op) == state.prev_solution.machine(op);
    d.labels.push_back(y);
    if (y) fix.insert(op);
  }
  d.oracle_fix = fix;
  d.fix = std::move(fix);
  return d;
}

FixDecision select_fix_set(const FixStrategy& strategy, const RhoState& state, const SubsolveFn& subsolve,
                           std::uint64_t seed) {
  FixDecision d;
  if (state.iteration < 2 || state.overlap_ops.empty()) return d;
  switch (strategy.kind) {
    case FixStrategy::Kind::Default:
    case FixStrategy::Kind::WarmStart:
      break;
    case FixStrategy::Kind::First: {
      auto k = static_cast<std::size_t>(std::floor(strategy.sigma * static_cast<double>(state.overlap_ops.size())));
      d.fix.insert(state.overlap_ops.begin(), state.overlap_ops.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    }
    case FixStrategy::Kind::Random: {
      Rng rng(derive_seed(seed, Stream::RandomFix, {strategy.seed, static_cast<std::uint64_t>(state.iteration)}));
      for (OpId op : state.overlap_ops)
        if (rng.bernoulli(strategy.sigma)) d.fix.insert(op);
      break;
    }
    case FixStrategy::Kind::Oracle:
      return oracle_fix_set(state, strategy.q, subsolve);
    case FixStrategy::Kind::Learned: {
      if (!strategy.model) throw ConfigError("learned strategy has no model loaded");
      auto t0 = std::chrono::steady_clock::now();
      std::vector<double> p = strategy.model->predict(state);
      d.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (p.size() != state.overlap_ops.size()) throw ShapeError("predictor output does not match the overlap set");
      for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] >= strategy.threshold) d.fix.insert(state.overlap_ops[i]);
      break;
    }
  }
  return d;
}

namespace {

std::vector<OpId> by_start(const std::vector<OpId>& plan_ops, const Solution& solution) {
  std::vector<std::size_t> idx(plan_ops.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return solution.start(plan_ops[a]) < solution.start(plan_ops[b]);
  });
  std::vector<OpId> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(plan_ops[i]);
  return out;
}

}  // namespace

std::vector<OpId> get_step_operations(const std::vector<OpId>& plan_ops, int S, const Solution& solution,
                                      const FjspInstance& inst, const DurationOverlay* overlay,
                                      std::optional<Time> next_event) {
  std::vector<OpId> sorted = by_start(plan_ops, solution);
  if (static_cast<int>(sorted.size()) > S) sorted.resize(static_cast<std::size_t>(S));
  if (!next_event) return sorted;
  std::vector<OpId> out;
  for (OpId op : sorted) {
    if (end_time(inst, solution, op, overlay) > *next_event) break;
    out.push_back(op);
  }
  return out;
}

std::vector<OpId> execute_with_noise(const FjspInstance& inst, Solution& executed, const Solution& planned,
                                     const std::vector<OpId>& step_ops, std::optional<Time> next_event) {
  Boundary b = build_boundary(inst, executed);
  std::map<int, Time> job_free = b.prev_job_end;
  std::map<MachineId, Time> machine_free = b.prev_machine_end;
  std::vector<OpId> committed;
  for (OpId op : by_start(step_ops, planned)) {
    MachineId m = planned.machine(op);
    int job = inst.op(op).job_id;
    Time s = std::max({planned.start(op), machine_free.count(m) ? machine_free[m] : 0, job_free.count(job) ? job_free[job] : 0});
    Time e = s + duration_of(inst, op, m);
    if (next_event && e > *next_event) break;
    executed.set(op, {m, s});
    machine_free[m] = e;
    job_free[job] = e;
    committed.push_back(op);
  }
  return committed;
}

std::uint64_t iteration_solve_seed(std::uint64_t seed, int iteration) {
  return derive_seed(seed, Stream::Solve, {static_cast<std::uint64_t>(iteration)});
}

RhoResult run_rho(const FjspInstance& inst, const RhoParams& params, const FixStrategy& strategy,
                  const BreakdownSchedule* events, const NoiseModel* noise, std::uint64_t seed,
                  const RhoOptions& options) {
  params.validate();
  strategy.validate();
  const ObjectiveKind kind = inst.objective();
  require_objective_data(inst, kind);
  const bool by_moves = params.budget.mode == Budget::Mode::MoveCount;
  const auto wall0 = std::chrono::steady_clock::now();

  const std::vector<OpId> order = rho_order(inst, kind);
  RhoResult out;
  out.report.method = strategy.name();
  out.report.time_unit = by_moves ? "moves" : "seconds";

  RhoState state;
  state.instance = &inst;
  state.objective = kind;
  state.executed = Solution(inst.num_ops());
  state.prev_solution = Solution(inst.num_ops());
  int committed_total = 0;
  double effort = 0.0;
  int r = 0;

  while (committed_total < inst.num_ops()) {
    std::set<MachineId> down = events ? events->down_at(state.now) : std::set<MachineId>{};
    std::optional<Time> next_event = events ? events->next_change_after(state.now) : std::nullopt;
    std::vector<OpId> plan = get_plan_operations(inst, order, params.H, state.executed, down);
    if (plan.empty()) {
      if (!next_event) throw Error("every remaining operation is blocked by a permanent breakdown");
      state.now = *next_event;
      continue;
    }
    ++r;
    state.iteration = r;
    state.prev_down = std::move(state.down);
    state.down = std::move(down);
    std::set<OpId> prev_plan(state.prev_plan_ops.begin(), state.prev_plan_ops.end());
    state.plan_ops = plan;
    state.overlap_ops.clear();
    state.new_ops.clear();
    for (OpId op : plan) (prev_plan.count(op) ? state.overlap_ops : state.new_ops).push_back(op);
    state.boundary = build_boundary(inst, state.executed);
    state.prev_overlay = std::move(state.overlay);
    state.overlay.reset();
    if (noise)
      state.overlay = observe_durations(inst, plan, params.S, derive_seed(seed, Stream::Noise, {static_cast<std::uint64_t>(r)}), *noise);

    Subproblem base = state.subproblem();
    if (!events) base.earliest_start = 0;
    auto unrestricted = [&](std::uint64_t stream_seed) {
      return [&, stream_seed](int q) {
        return solve(base, params.budget, derive_seed(stream_seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(q)}));
      };
    };
    FixDecision decision =
        select_fix_set(strategy, state, unrestricted(derive_seed(seed, Stream::OracleSolve)), seed);
    IterationRecord rec;
    if (options.shadow_oracle_q > 0 && strategy.kind != FixStrategy::Kind::Oracle && r >= 2 && !state.overlap_ops.empty()) {
      FixDecision shadow = oracle_fix_set(state, options.shadow_oracle_q, unrestricted(derive_seed(seed, Stream::ShadowOracle)));
      decision.oracle_fix = shadow.oracle_fix;
      decision.labels = shadow.labels;
    } else if (strategy.kind == FixStrategy::Kind::Oracle) {
      rec.oracle_moves = decision.oracle_moves;
      rec.oracle_seconds = decision.oracle_seconds;
      if (options.include_oracle_time) effort += by_moves ? static_cast<double>(decision.oracle_moves) : decision.oracle_seconds;
    }
    if (!by_moves) effort += decision.predict_seconds;
    if (options.observer && r >= 2) options.observer(state, decision);

    Subproblem sub = base;
    for (OpId op : decision.fix) sub.fixed_assignment[op] = state.prev_solution.machine(op);
    if (strategy.kind == FixStrategy::Kind::WarmStart)
      for (OpId op : state.overlap_ops) sub.warm_start[op] = *state.prev_solution.at(op);
    SolveResult res = solve(sub, params.budget, iteration_solve_seed(seed, r));
    effort += by_moves ? static_cast<double>(res.stats.moves) : res.stats.seconds;

    std::vector<OpId> committed;
    if (noise) {
      auto step = get_step_operations(plan, params.S, res.solution, inst, sub.overlay());
      committed = execute_with_noise(inst, state.executed, res.solution, step, next_event);
    } else {
      committed = get_step_operations(plan, params.S, res.solution, inst, nullptr, next_event);
      for (OpId op : committed) state.executed.set(op, *res.solution.at(op));
    }
    committed_total += static_cast<int>(committed.size());
    if (next_event && static_cast<int>(committed.size()) < std::min<int>(params.S, static_cast<int>(plan.size())))
      state.now = *next_event;

    rec.iteration = r;
    rec.now = sub.earliest_start;
    rec.plan_size = static_cast<int>(plan.size());
    rec.overlap_size = static_cast<int>(state.overlap_ops.size());
    rec.fix_set.assign(decision.fix.begin(), decision.fix.end());
    if (decision.oracle_fix) {
      rec.oracle_fix = std::vector<OpId>(decision.oracle_fix->begin(), decision.oracle_fix->end());
      IterationErrors err;
      err.iteration = r;
      err.overlap = rec.overlap_size;
      err.oracle_size = static_cast<int>(decision.oracle_fix->size());
      for (OpId op : decision.fix) err.fp += !decision.oracle_fix->count(op);
      for (OpId op : *decision.oracle_fix) err.fn += !decision.fix.count(op);
      out.report.errors.push_back(err);
    }
    rec.labels = decision.labels;
    rec.committed = committed;
    for (OpId op : committed) rec.planned_starts.push_back(res.solution.start(op));
    rec.down = state.down;
    rec.sub_objective = subproblem_objective(sub, res.solution);
    rec.moves = res.stats.moves;
    rec.seconds = res.stats.seconds;
    out.trace.push_back(std::move(rec));

    state.prev_plan_ops = plan;
    state.prev_solution = Solution(inst.num_ops());
    for (OpId op : plan) state.prev_solution.set(op, *res.solution.at(op));
  }

  out.solution = state.executed;
  out.report.objective = evaluate_objective(inst, out.solution);
  out.report.solve_time = effort;
  out.report.iterations = r;
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

}  // namespace lrho
