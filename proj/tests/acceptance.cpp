// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lrho/analysis.hpp"
#include "lrho/commands.hpp"
#include "lrho/learn.hpp"
#include "lrho/rho.hpp"
#include "lrho/subsolver.hpp"

using namespace lrho;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int workers() { return default_workers(); }

// ---- 1. feasibility suite

Outcome feasibility_suite() {
  Rng rng(1001);
  int runs = 0, bad = 0;
  std::string first_bad;
  std::map<std::string, int> per_strategy;
  for (int k = 0; k < 1000; ++k) {
    const bool makespan = k % 2 == 0;
    const int machines = static_cast<int>(rng.uniform_int(2, 5));
    const int jobs = static_cast<int>(rng.uniform_int(2, 6));
    const int ops = static_cast<int>(rng.uniform_int(2, 6));
    const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(k);
    ObjectiveKind kind = makespan ? ObjectiveKind::Makespan
                         : rng.bernoulli(0.5) ? ObjectiveKind::TotalStartDelay
                                              : ObjectiveKind::StartPlusEndDelay;
    FjspInstance inst = makespan ? gen_makespan_instance(seed, machines, jobs, ops)
                                 : gen_delay_instance(seed, machines, jobs, ops, kind);
    OnlineSettings online;
    if ((k / 2) % 2) {
      const BreakdownIntensity levels[] = {BreakdownIntensity::low(), BreakdownIntensity::mid(), BreakdownIntensity::high()};
      online.breakdowns = levels[rng.uniform_int(0, 2)];
    }
    if ((k / 4) % 2) online.noise = NoiseModel{};
    RhoParams p;
    p.H = static_cast<int>(rng.uniform_int(2, std::min(inst.num_ops(), 16)));
    p.S = static_cast<int>(rng.uniform_int(1, p.H));
    p.budget = Budget::move_count(3000, 1000);

    FixStrategy s;
    switch ((k / 8) % 6) {
      case 0: s = FixStrategy::default_rho(); break;
      case 1: s = FixStrategy::warm_start(); break;
      case 2: s = FixStrategy::first(rng.uniform01()); break;
      case 3: s = FixStrategy::random(rng.uniform01(), seed); break;
      case 4: s = FixStrategy::oracle(static_cast<int>(rng.uniform_int(1, 3))); break;
      default: {
        auto model = MlpModel::init(variant_for_run(inst, online), seed, 8);
        s = FixStrategy::learned(std::make_shared<LearnedPredictor>(model), 0.3 + 0.4 * rng.uniform01());
      }
    }
    auto events = events_for(inst, online, seed);
    RhoResult r = run_rho(inst, p, s, events ? &*events : nullptr, online.noise ? &*online.noise : nullptr, seed);
    auto v = check_feasibility(inst, r.solution);
    ++runs;
    ++per_strategy[s.name().substr(0, s.name().find(':'))];
    if (!v.empty() || !r.solution.complete()) {
      ++bad;
      if (first_bad.empty()) first_bad = " first at run " + std::to_string(k) + ": " + std::string(to_string(v.front().kind));
    }
  }
  std::string detail = std::to_string(runs) + " runs, " + std::to_string(bad) + " infeasible, strategies";
  for (const auto& [name, n] : per_strategy) detail += " " + name + "=" + std::to_string(n);
  return {bad == 0 && runs == 1000 && per_strategy.size() == 6, detail + first_bad};
}

// ---- 2. subsolver vs exact optimum

Outcome exact_equivalence() {
  int exact = 0, within = 0, brute_ok = 0;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    FjspInstance inst = fixtures::tiny(seed);
    Subproblem sub = Subproblem::whole(inst);
    const Time opt = subproblem_objective(sub, exact_solve(sub));
    const Time got = subproblem_objective(sub, solve(sub, Budget::move_count(20000, 5000), seed).solution);
    exact += got == opt;
    const double gap = opt > 0 ? static_cast<double>(got - opt) / static_cast<double>(opt) : (got == opt ? 0.0 : 1e9);
    worst = std::max(worst, gap);
    within += gap <= 0.10 + 1e-12;
    if (seed < 20) brute_ok += opt == fixtures::brute_force_optimum(inst);
  }
  return {exact >= 90 && within == 100 && brute_ok == 20,
          std::to_string(exact) + "/100 optimal, " + std::to_string(within) + "/100 within 10% (worst gap " +
              fmt(100 * worst) + "%), exact = enumeration on " + std::to_string(brute_ok) + "/20"};
}

// ---- 3. degenerate window

Outcome degenerate_window() {
  int same = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    FjspInstance inst = k % 2 ? gen_delay_instance(k, 4, 5, 5, k % 4 == 1 ? ObjectiveKind::TotalStartDelay
                                                                             : ObjectiveKind::StartPlusEndDelay)
                              : gen_makespan_instance(k, 4, 5, 5);
    RhoParams p;
    p.H = p.S = inst.num_ops();
    p.budget = Budget::move_count(20000, 5000);
    const std::uint64_t seed = 70 + k;
    RhoResult r = run_rho(inst, p, FixStrategy::default_rho(), nullptr, nullptr, seed);
    SolveResult direct = solve(Subproblem::whole(inst), p.budget, iteration_solve_seed(seed, 1));
    same += r.solution == direct.solution && r.report.iterations == 1 &&
            r.report.solve_time == static_cast<double>(direct.stats.moves);
  }
  return {same == 20, std::to_string(same) + "/20 identical to a direct solve"};
}

// ---- 4. closed forms vs Monte Carlo

Outcome monte_carlo_grid() {
  const int W = 50;
  int points = 0, agree = 0;
  double worst_ratio = 0;
  for (double b : {0.6, 0.8, 1.0})
    for (double m : {0.0, 0.3, 0.6}) {
      LinearDecay d{b, m, W};
      if (!d.valid()) continue;
      std::vector<double> p;
      for (int i = 1; i <= W; ++i) p.push_back(d.pfix(i));
      for (double s : {0.2, 0.5, 0.8})
        for (FixMethod f : {FixMethod{RandomFix{s}}, FixMethod{FirstFix{s}}, FixMethod{LearnedFix{s / 2, s / 4}}}) {
          ErrorPair e = closed_form_errors(f, d);
          McEstimate mc = monte_carlo_errors(f, p, 100000, 17 + static_cast<std::uint64_t>(points), workers());
          auto ok = [&](double closed, double est, double se) {
            const double tol = std::max(0.01 * std::abs(closed), 3 * se);
            if (tol > 0) worst_ratio = std::max(worst_ratio, std::abs(closed - est) / tol);
            return std::abs(closed - est) <= tol;
          };
          ++points;
          agree += ok(e.expected_fp, mc.fp, mc.fp_se) && ok(e.expected_fn, mc.fn, mc.fn_se);
        }
    }
  bool random_exact = true;
  for (double s : {0.1, 0.2, 0.4, 0.5, 0.8}) {
    ErrorPair e = closed_form_errors(RandomFix{s}, LinearDecay{0.8, 0.3, W});
    random_exact = random_exact && std::abs(*e.fpr - s) < 1e-12 && std::abs(*e.fnr - (1 - s)) < 1e-12;
    MethodRates r = first_random_rates(LinearDecay{0.8, 0.3, W}, s);
    random_exact = random_exact && r.random.alpha == s && r.random.beta == 1 - s;
  }
  MethodRates r = first_random_rates(LinearDecay{0.7, 0.4, W}, 0.5);
  const bool first_ok = std::abs(r.first.alpha - 0.4) < 1e-12 && std::abs(r.first.beta - 0.4) < 1e-12;
  return {agree == points && random_exact && first_ok,
          std::to_string(agree) + "/" + std::to_string(points) + " grid points agree (worst |diff|/tol " +
              fmt(worst_ratio) + "), random rates exact: " + (random_exact ? "yes" : "no") + ", first(0.5) rates (" +
              fmt(r.first.alpha, 12) + ", " + fmt(r.first.beta, 12) + ")"};
}

// ---- 5. closed-form spot values

Outcome spot_values() {
  LinearDecay d{0.7, 0.4, 10};
  double E = 0;
  for (int i = 1; i <= 10; ++i) E += d.pfix(i);
  bool ok = std::abs(E - 4.8) < 1e-12 && std::abs(d.expected_nfix() - 4.8) < 1e-12;
  struct Spot {
    FixMethod m;
    double fp, fn;
  };
  double worst = std::abs(d.expected_nfix() - E);
  for (const Spot& s : {Spot{RandomFix{0.5}, 2.6, 2.4}, Spot{FirstFix{0.5}, 2.1, 1.9}, Spot{LearnedFix{0.1, 0.2}, 0.52, 0.96}}) {
    double fp = 0, fn = 0;
    for (int i = 1; i <= 10; ++i) {
      const double p = d.pfix(i);
      if (auto* r = std::get_if<RandomFix>(&s.m)) {
        fp += r->sigma * (1 - p);
        fn += (1 - r->sigma) * p;
      } else if (auto* f = std::get_if<FirstFix>(&s.m)) {
        const bool sel = i <= static_cast<int>(std::floor(f->sigma * 10 + 1e-9));
        fp += sel ? 1 - p : 0;
        fn += sel ? 0 : p;
      } else {
        const auto& l = std::get<LearnedFix>(s.m);
        fp += l.alpha * (1 - p);
        fn += l.beta * p;
      }
    }
    ErrorPair e = closed_form_errors(s.m, d);
    for (double diff : {e.expected_fp - fp, e.expected_fn - fn, e.expected_fp - s.fp, e.expected_fn - s.fn}) {
      worst = std::max(worst, std::abs(diff));
      ok = ok && std::abs(diff) < 1e-12;
    }
  }
  return {ok, "E[n_fix]=" + fmt(E, 15) + ", max deviation " + fmt(worst, 3)};
}

// ---- 6. gradient check

Outcome gradient() {
  Rng rng(606);
  double worst = 0;
  for (int t = 0; t < 10; ++t) {
    const auto v = static_cast<FeatureVariant>(t % 5);
    MlpModel m = MlpModel::init(v, 600 + static_cast<std::uint64_t>(t), 3 + t % 5);
    StateRecord r = fixtures::random_record(rng, v, 3 + t % 6, 1 + t % 3, 2 + t % 4);
    const double w = 0.25 + 0.3 * t;
    worst = std::max(worst, fixtures::gradient_check(m, r, w, LossForm::PositiveWeighted));
    worst = std::max(worst, fixtures::gradient_check(m, r, w, LossForm::BracketWeighted));
  }
  return {worst < 1e-4, "max relative error " + fmt(worst, 3) + " over 10 configurations x 2 loss forms"};
}

// ---- 7-9. learning pipeline

struct Pipeline {
  std::vector<StateRecord> train_records;
  double test_accuracy = 0;
  EvalResult eval;
  LinearFit fit;
  double seconds = 0;
  std::string train_note;
};

RhoParams pipeline_params() {
  RhoParams p;
  p.H = 24;
  p.S = 10;
  p.budget = Budget::move_count(500000, 100000);
  return p;
}

const std::vector<FixStrategy>& heuristic_strategies() {
  static const std::vector<FixStrategy> s{FixStrategy::first(0.2), FixStrategy::first(0.4), FixStrategy::random(0.2, 1),
                                          FixStrategy::random(0.4, 1)};
  return s;
}

Pipeline run_pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  DistributionSpec spec;  // delay, 5 machines, 8 jobs, 10 ops per job
  std::vector<FjspInstance> train_set, test_set;
  std::vector<std::string> names;
  for (std::uint64_t s = 0; s < 60; ++s) train_set.push_back(generate_instance(spec, s));
  for (std::uint64_t s = 0; s < 20; ++s) {
    test_set.push_back(generate_instance(spec, 10000 + s));
    names.push_back(instance_file_name(spec, 10000 + s));
  }
  Pipeline out;
  const RhoParams params = pipeline_params();
  out.train_records = cmd_collect(train_set, params, 3, {}, 1, workers()).records;

  TrainConfig tc;
  tc.steps = 4000;
  tc.hidden = 32;
  tc.batch_size = 32;
  tc.eval_every = 250;
  tc.val_fraction = 0.1;
  tc.seed = 7;
  TrainResult trained = cmd_train(Dataset{FeatureVariant::StartDelay, out.train_records}, tc, FeatureVariant::StartDelay);
  out.train_note = std::to_string(out.train_records.size()) + " train records, best step " + std::to_string(trained.best_step);

  auto test_records = cmd_collect(test_set, params, 3, {}, 2, workers()).records;
  out.test_accuracy = evaluate_classifier(trained.model, test_records, tc.w_pos).accuracy();

  std::vector<FixStrategy> strategies{FixStrategy::oracle(3),
                                      FixStrategy::learned(std::make_shared<LearnedPredictor>(trained.model))};
  for (const auto& s : heuristic_strategies()) strategies.push_back(s);
  out.eval = cmd_eval(test_set, names, params, strategies, {}, 3, workers());
  out.fit = fit_linear_decay(empirical_pfix(out.train_records).p);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::pair<double, double> medians(const EvalResult& r, const std::string& method) {
  std::vector<double> oi, ti;
  for (const auto& run : r.runs)
    if (run.method == method) {
      oi.push_back(run.report.oi_percent.value_or(std::nan("")));
      ti.push_back(run.report.ti_percent.value_or(std::nan("")));
    }
  return {median(oi), median(ti)};
}

Outcome learning(const Pipeline& p) {
  auto [l_oi, l_ti] = medians(p.eval, FixStrategy::learned(nullptr).name());
  auto [o_oi, o_ti] = medians(p.eval, FixStrategy::oracle(3).name());
  const bool ok = p.test_accuracy >= 0.70 && l_ti > 0 && l_oi >= -5 && o_ti > 0 && o_oi >= 0 && p.seconds <= 7200;
  return {ok, "test accuracy " + fmt(p.test_accuracy) + ", learned median TI " + fmt(l_ti) + "% OI " + fmt(l_oi) +
                  "%, oracle median TI " + fmt(o_ti) + "% OI " + fmt(o_oi) + "%, " + p.train_note + ", pipeline " +
                  fmt(p.seconds) + " s"};
}

Outcome heuristics(const Pipeline& p) {
  bool ok = true;
  std::string detail;
  std::map<std::string, double> oi;
  for (const auto& s : heuristic_strategies()) {
    auto [m_oi, m_ti] = medians(p.eval, s.name());
    oi[s.name()] = m_oi;
    ok = ok && m_ti > 0 && m_oi < 0;
    detail += s.name() + " TI " + fmt(m_ti) + "% OI " + fmt(m_oi) + "%; ";
  }
  const double m = p.fit.raw.m;
  if (m > 0.1) {
    for (double sigma : {0.2, 0.4}) {
      const bool order = oi[FixStrategy::first(sigma).name()] >= oi[FixStrategy::random(sigma, 1).name()];
      ok = ok && order;
    }
    detail += "fitted m " + fmt(m) + " > 0.1, first OI >= random OI checked";
  } else {
    detail += "fitted m " + fmt(m) + " <= 0.1, ordering not required";
  }
  return {ok, detail};
}

Outcome decay(const Pipeline& p) {
  const bool ok = p.fit.raw.m > 0 && p.fit.p_value && *p.fit.p_value < 0.05;
  return {ok, "W " + std::to_string(empirical_pfix(p.train_records).W) + ", fitted b " + fmt(p.fit.raw.b) + " m " +
                  fmt(p.fit.raw.m) + ", one-sided p " + (p.fit.p_value ? fmt(*p.fit.p_value, 3) : std::string("n/a"))};
}

// ---- 10. w_pos tradeoff

Outcome wpos_tradeoff() {
  auto data = fixtures::synthetic_records(7, 300, 0.8);
  auto held = fixtures::synthetic_records(8, 100, 0.8);
  auto fpr = [](const ClassifierMetrics& m) { return m.fp + m.tn ? double(m.fp) / (m.fp + m.tn) : 0.0; };
  std::vector<double> low, high;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (double w : {0.25, 2.0}) {
      TrainConfig c;
      c.seed = seed;
      c.steps = 600;
      c.hidden = 16;
      c.batch_size = 16;
      c.w_pos = w;
      c.eval_every = 600;
      c.learning_rate = 3e-3;
      double f = fpr(evaluate_classifier(train(data, c).model, held, w));
      (w < 1 ? low : high).push_back(f);
    }
  }
  const double a = median(low), b = median(high);
  return {a <= b, "median FPR " + fmt(a) + " at w_pos 0.25 vs " + fmt(b) + " at w_pos 2.0"};
}

// ---- 11. breakdown and noise contracts

Outcome online_contracts() {
  int overlaps = 0, early = 0, infeasible = 0, event_runs = 0, commits = 0;
  const BreakdownIntensity levels[] = {BreakdownIntensity::low(), BreakdownIntensity::mid(), BreakdownIntensity::high()};
  for (int k = 0; k < 200; ++k) {
    const auto seed = static_cast<std::uint64_t>(9000 + k);
    FjspInstance inst = k % 4 == 3 ? gen_delay_instance(seed, 4, 5, 6) : gen_makespan_instance(seed, 4, 5, 6);
    OnlineSettings online;
    online.breakdowns = levels[k % 3];
    auto events = events_for(inst, online, seed);
    RhoParams p;
    p.H = 8 + k % 5;
    p.S = 3 + k % 4;
    p.budget = Budget::move_count(3000, 1000);
    const FixStrategy strategies[] = {FixStrategy::default_rho(), FixStrategy::first(0.3), FixStrategy::oracle(1)};
    RhoResult r = run_rho(inst, p, strategies[k % 3], &*events, nullptr, seed);
    event_runs += !events->events.empty();
    for (OpId o = 0; o < inst.num_ops(); ++o) {
      const MachineId m = r.solution.machine(o);
      const Time s = r.solution.start(o);
      overlaps += events->is_down_during(m, s, s + duration_of(inst, o, m));
    }
    infeasible += !check_feasibility(inst, r.solution).empty();
  }
  for (int k = 0; k < 200; ++k) {
    const auto seed = static_cast<std::uint64_t>(9500 + k);
    FjspInstance inst = gen_delay_instance(seed, 4, 5, 6, k % 2 ? ObjectiveKind::StartPlusEndDelay : ObjectiveKind::TotalStartDelay);
    NoiseModel noise;
    noise.epsilon = 0.1 + 0.1 * (k % 5);
    RhoParams p;
    p.H = 8 + k % 5;
    p.S = 3 + k % 4;
    p.budget = Budget::move_count(3000, 1000);
    RhoResult r = run_rho(inst, p, k % 2 ? FixStrategy::first(0.3) : FixStrategy::default_rho(), nullptr, &noise, seed);
    for (const auto& it : r.trace)
      for (std::size_t i = 0; i < it.committed.size(); ++i) {
        ++commits;
        early += r.solution.start(it.committed[i]) < it.planned_starts[i];
      }
    infeasible += !check_feasibility(inst, r.solution).empty();
  }
  return {overlaps == 0 && early == 0 && infeasible == 0,
          "breakdown runs: " + std::to_string(overlaps) + " ops on down machines (" + std::to_string(event_runs) +
              "/200 runs with events); noise runs: " + std::to_string(early) + "/" + std::to_string(commits) +
              " commits started early; " + std::to_string(infeasible) + "/400 infeasible"};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %d: %s (%s) [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  report(1, feasibility_suite);
  report(2, exact_equivalence);
  report(3, degenerate_window);
  report(4, monte_carlo_grid);
  report(5, spot_values);
  report(6, gradient);

  std::optional<Pipeline> pipe;
  std::string pipe_error;
  try {
    pipe = run_pipeline();
  } catch (const std::exception& e) {
    pipe_error = e.what();
  }
  auto with_pipe = [&](Outcome (*fn)(const Pipeline&)) {
    return [&, fn] { return pipe ? fn(*pipe) : Outcome{false, "pipeline failed: " + pipe_error}; };
  };
  report(7, with_pipe(learning));
  report(8, with_pipe(heuristics));
  report(9, with_pipe(decay));
  report(10, wpos_tradeoff);
  report(11, online_contracts);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed ? 1 : 0;
}
