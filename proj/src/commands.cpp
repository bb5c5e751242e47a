#include "lrho/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "lrho/rng.hpp"

namespace lrho {

namespace {

std::string num(double v) { return format_double(v); }
std::string num(std::int64_t v) { return std::to_string(v); }
std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Two standard errors of the mean (sample std).
double two_se(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return 2.0 * std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

// ---- generation

void DistributionSpec::validate() const {
  if (family != "makespan" && family != "delay") throw ConfigError("family must be makespan or delay");
  if (family == "makespan" && objective != ObjectiveKind::Makespan)
    throw ConfigError("makespan family needs the makespan objective");
  if (family == "delay" && !is_delay_objective(objective)) throw ConfigError("delay family needs a delay objective");
  if (machines < 1 || jobs < 1 || ops_per_job < 1) throw ConfigError("instance counts must be >= 1");
}

FjspInstance generate_instance(const DistributionSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.family == "makespan") return gen_makespan_instance(seed, spec.machines, spec.jobs, spec.ops_per_job);
  return gen_delay_instance(seed, spec.machines, spec.jobs, spec.ops_per_job, spec.objective);
}

std::string instance_file_name(const DistributionSpec& spec, std::uint64_t seed) {
  return std::string(to_string(spec.objective)) + "_m" + std::to_string(spec.machines) + "_j" +
         std::to_string(spec.jobs) + "_n" + std::to_string(spec.ops_per_job) + "_s" + std::to_string(seed) + ".json";
}

std::vector<fs::path> cmd_gen(const DistributionSpec& spec, const std::vector<std::uint64_t>& seeds, const fs::path& out_dir) {
  spec.validate();
  std::vector<fs::path> paths;
  for (std::uint64_t seed : seeds) {
    fs::path p = out_dir / instance_file_name(spec, seed);
    save_instance(p, generate_instance(spec, seed));
    paths.push_back(p);
  }
  return paths;
}

// ---- online settings

Time breakdown_horizon(const FjspInstance& inst) {
  Time h = 0, release = 0;
  for (const auto& op : inst.ops()) {
    Time longest = 0;
    for (const auto& md : op.compatible) longest = std::max(longest, md.duration);
    h += longest;
    if (op.release_time) release = std::max(release, *op.release_time);
  }
  return std::max<Time>(1, h + release);
}

std::optional<BreakdownSchedule> events_for(const FjspInstance& inst, const OnlineSettings& online, std::uint64_t run_seed) {
  if (!online.breakdowns) return std::nullopt;
  return gen_breakdowns(run_seed, *online.breakdowns, breakdown_horizon(inst), inst.num_machines());
}

FeatureVariant variant_for_run(const FjspInstance& inst, const OnlineSettings& online) {
  return variant_for(inst.objective(), online.breakdowns.has_value(), online.noise.has_value());
}

std::vector<Violation> verify_solution(const FjspInstance& inst, const Solution& sol) { return check_feasibility(inst, sol); }

// ---- solve

const std::vector<std::string>& eval_columns() {
  static const std::vector<std::string> cols = {"instance", "name",       "method",     "objective",  "solve_time",
                                                "time_unit", "wall_seconds", "iterations", "oi_percent", "ti_percent",
                                                "fp",        "fn"};
  return cols;
}

const std::vector<std::string>& eval_summary_columns() {
  static const std::vector<std::string> cols = {"method",  "runs",   "objective_mean", "solve_time_mean",
                                                "oi_mean", "oi_2se", "ti_mean",        "ti_2se",
                                                "oi_median", "ti_median"};
  return cols;
}

namespace {

std::vector<std::string> report_row(int instance, const std::string& name, const RunReport& r) {
  std::optional<double> fp, fn;
  if (!r.errors.empty()) {
    fp = fn = 0.0;
    for (const auto& e : r.errors) {
      *fp += e.fp;
      *fn += e.fn;
    }
  }
  return {std::to_string(instance), name, r.method, num(static_cast<std::int64_t>(r.objective)), num(r.solve_time),
          r.time_unit, num(r.wall_seconds), std::to_string(r.iterations), opt_num(r.oi_percent), opt_num(r.ti_percent),
          opt_num(fp), opt_num(fn)};
}

}  // namespace

SolveOutcome cmd_solve(const FjspInstance& inst, const std::string& instance_name, const RhoParams& params,
                       const FixStrategy& strategy, const OnlineSettings& online, std::uint64_t seed,
                       const SolveOptions& options) {
  auto events = events_for(inst, online, seed);
  SolveOutcome out;
  out.result = run_rho(inst, params, strategy, events ? &*events : nullptr, online.noise ? &*online.noise : nullptr, seed);
  if (options.verify) out.violations = verify_solution(inst, out.result.solution);
  if (options.solution_out) save_solution(*options.solution_out, out.result.solution);
  if (options.report_csv) {
    CsvTable t{eval_columns(), {report_row(0, instance_name, out.result.report)}};
    append_csv(*options.report_csv, t);
  }
  return out;
}

// ---- collect / train

CollectResult cmd_collect(const std::vector<FjspInstance>& instances, const RhoParams& params, int Q,
                          const OnlineSettings& online, std::uint64_t seed, int workers,
                          std::optional<FeatureVariant> variant) {
  if (Q < 1) throw ConfigError("collection needs Q >= 1");
  if (instances.empty()) return {variant.value_or(FeatureVariant::Makespan), {}};
  CollectResult out;
  out.variant = variant.value_or(variant_for_run(instances.front(), online));
  CollectOptions opt;
  opt.variant = out.variant;
  opt.noise = online.noise ? &*online.noise : nullptr;
  opt.workers = workers;
  if (online.breakdowns)
    opt.make_events = [&](std::size_t i, std::uint64_t run_seed) { return events_for(instances[i], online, run_seed); };
  out.records = collect_labels(instances, params, Q, seed, opt);
  return out;
}

TrainResult cmd_train(const Dataset& dataset, const TrainConfig& config, std::optional<FeatureVariant> expected) {
  if (expected && *expected != dataset.variant)
    throw ConfigError("dataset variant " + std::string(to_string(dataset.variant)) + " does not match requested " +
                      std::string(to_string(*expected)));
  return train(dataset.records, config);
}

CsvTable train_log_table(const TrainResult& result) {
  CsvTable t;
  t.header = {"step",      "train_loss", "train_accuracy", "train_tpr", "train_tnr",    "train_precision",
              "val_loss",  "val_accuracy", "val_tpr",     "val_tnr",   "val_precision", "best"};
  for (const auto& e : result.log) {
    std::vector<std::string> row = {num(e.step),           num(e.train_loss),         num(e.train.accuracy()),
                                    opt_num(e.train.tpr()), opt_num(e.train.tnr()),    opt_num(e.train.precision())};
    if (e.validation) {
      const auto& v = *e.validation;
      for (auto s : {num(v.loss), num(v.accuracy()), opt_num(v.tpr()), opt_num(v.tnr()), opt_num(v.precision())})
        row.push_back(s);
    } else {
      row.insert(row.end(), 5, "");
    }
    row.push_back(e.step == result.best_step ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---- eval

EvalResult cmd_eval(const std::vector<FjspInstance>& instances, const std::vector<std::string>& names,
                    const RhoParams& params, const std::vector<FixStrategy>& strategies, const OnlineSettings& online,
                    std::uint64_t seed, int workers, int shadow_oracle_q) {
  if (names.size() != instances.size()) throw ConfigError("one name per instance required");
  std::vector<FixStrategy> list;
  list.push_back(FixStrategy::default_rho());
  for (const auto& s : strategies)
    if (s.kind != FixStrategy::Kind::Default) list.push_back(s);
  for (const auto& s : list) s.validate();

  std::vector<std::vector<EvalRun>> per(instances.size());
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    const std::uint64_t run_seed = instance_run_seed(seed, i);
    auto events = events_for(instances[i], online, run_seed);
    RhoOptions opt;
    opt.shadow_oracle_q = shadow_oracle_q;
    for (const auto& s : list) {
      RhoResult r = run_rho(instances[i], params, s, events ? &*events : nullptr,
                            online.noise ? &*online.noise : nullptr, run_seed, opt);
      per[i].push_back({static_cast<int>(i), names[i], s.name(), std::move(r.report), std::move(r.trace)});
    }
    const RunReport& base = per[i].front().report;
    for (auto& run : per[i]) {
      try {
        Improvement im = improvement_metrics(base, run.report);
        run.report.oi_percent = im.oi_percent;
        run.report.ti_percent = im.ti_percent;
      } catch (const UndefinedMetricError&) {
      }
    }
  });

  EvalResult out;
  out.per_run.header = eval_columns();
  out.summary.header = eval_summary_columns();
  out.trace.header = {"instance", "method", "iteration", "overlap", "fixed", "oracle_fixed", "tp", "fp", "fn", "tn"};
  for (auto& v : per)
    for (auto& run : v) out.runs.push_back(std::move(run));
  for (const auto& run : out.runs) {
    out.per_run.rows.push_back(report_row(run.instance, run.instance_name, run.report));
    for (const auto& it : run.trace) {
      if (!it.oracle_fix) continue;
      const std::set<OpId> fix(it.fix_set.begin(), it.fix_set.end());
      int tp = 0;
      for (OpId op : *it.oracle_fix) tp += static_cast<int>(fix.count(op));
      const int fp = static_cast<int>(fix.size()) - tp;
      const int fn = static_cast<int>(it.oracle_fix->size()) - tp;
      const int tn = it.overlap_size - tp - fp - fn;
      out.trace.rows.push_back({std::to_string(run.instance), run.method, std::to_string(it.iteration),
                                std::to_string(it.overlap_size), std::to_string(fix.size()),
                                std::to_string(it.oracle_fix->size()), std::to_string(tp), std::to_string(fp),
                                std::to_string(fn), std::to_string(tn)});
    }
  }
  for (const auto& s : list) {
    const std::string method = s.name();
    std::vector<double> obj, time, oi, ti;
    for (const auto& run : out.runs) {
      if (run.method != method) continue;
      obj.push_back(static_cast<double>(run.report.objective));
      time.push_back(run.report.solve_time);
      if (run.report.oi_percent) oi.push_back(*run.report.oi_percent);
      if (run.report.ti_percent) ti.push_back(*run.report.ti_percent);
    }
    out.summary.rows.push_back({method, std::to_string(obj.size()), num(mean(obj)), num(mean(time)), num(mean(oi)),
                                num(two_se(oi)), num(mean(ti)), num(two_se(ti)), num(median(oi)), num(median(ti))});
  }
  return out;
}

// ---- sweep

std::string SweepPoint::label() const {
  std::string b = budget.mode == Budget::Mode::MoveCount
                      ? "moves:" + std::to_string(budget.max_moves) + ":" + std::to_string(budget.stall_moves)
                      : "time:" + format_double(budget.limit_secs) + ":" + format_double(budget.stall_secs);
  return std::to_string(H) + ":" + std::to_string(S) + ":" + b;
}

std::vector<SweepPoint> default_sweep_grid(Budget::Mode mode, double moves_per_second) {
  static const std::vector<std::pair<int, int>> windows = {{50, 15},  {50, 20},  {50, 25},  {50, 30}, {80, 20},
                                                           {80, 25},  {80, 30},  {80, 35},  {80, 40}, {100, 20},
                                                           {100, 30}, {100, 40}, {100, 50}};
  static const std::vector<std::pair<double, double>> limits = {{15, 2}, {30, 3}, {60, 3}};
  if (mode == Budget::Mode::MoveCount && !(moves_per_second > 0)) throw ConfigError("moves per second must be positive");
  std::vector<SweepPoint> grid;
  for (auto [H, S] : windows) {
    for (auto [T, Tes] : limits) {
      Budget b = mode == Budget::Mode::WallClock
                     ? Budget::wall_clock(T, Tes)
                     : Budget::move_count(std::llround(T * moves_per_second), std::llround(Tes * moves_per_second));
      grid.push_back({H, S, b});
    }
  }
  return grid;
}

std::vector<SweepPoint> parse_sweep_grid(const std::string& text) {
  std::vector<SweepPoint> grid;
  for (const auto& item : split(text, ';')) {
    auto f = split(item, ':');
    if (f.size() != 5) throw ConfigError("grid point '" + item + "' must be H:S:moves:MAX:STALL or H:S:time:T:TES");
    try {
      SweepPoint p;
      p.H = std::stoi(f[0]);
      p.S = std::stoi(f[1]);
      if (f[2] == "moves") p.budget = Budget::move_count(std::stoll(f[3]), std::stoll(f[4]));
      else if (f[2] == "time") p.budget = Budget::wall_clock(std::stod(f[3]), std::stod(f[4]));
      else throw ConfigError("grid budget kind must be moves or time");
      grid.push_back(p);
    } catch (const std::logic_error&) {
      throw ConfigError("bad number in grid point '" + item + "'");
    }
  }
  return grid;
}

std::size_t line_search_select(const std::vector<SweepCandidate>& candidates, double best_objective, double r_s) {
  if (candidates.empty()) throw ConfigError("empty grid");
  if (!(r_s > 0)) throw ConfigError("line search step must be positive");
  // Position of each objective on the bucket axis; bucket i covers [i, i+1].
  std::vector<double> x(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double obj = candidates[k].objective;
    if (std::isinf(r_s)) x[k] = 0.0;
    else if (best_objective > 0) x[k] = std::max(0.0, (obj / best_objective - 1.0) / r_s);
    else x[k] = obj <= best_objective ? 0.0 : std::numeric_limits<double>::infinity();
  }
  constexpr double eps = 1e-9;
  double first_bucket = std::numeric_limits<double>::infinity();
  for (double v : x) first_bucket = std::min(first_bucket, std::max(0.0, std::ceil(v - eps) - 1.0));
  std::size_t pick = candidates.size();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (x[k] > first_bucket + 1.0 + eps) continue;
    if (pick == candidates.size() || candidates[k].time < candidates[pick].time ||
        (candidates[k].time == candidates[pick].time && candidates[k].objective < candidates[pick].objective))
      pick = k;
  }
  return pick;
}

SweepResult cmd_sweep(const std::vector<FjspInstance>& instances, const std::vector<SweepPoint>& grid,
                      const std::vector<FixStrategy>& strategies, std::uint64_t seed, int workers, double r_s,
                      const OnlineSettings& online) {
  if (grid.empty()) throw ConfigError("empty grid");
  if (strategies.empty()) throw ConfigError("sweep needs at least one strategy");
  if (instances.empty()) throw ConfigError("sweep needs at least one instance");
  for (const auto& p : grid)
    if (p.budget.mode != grid.front().budget.mode) throw ConfigError("grid mixes wall-clock and move budgets");

  // results[s][g] = (mean objective, mean time)
  std::vector<std::vector<SweepCandidate>> results(strategies.size(), std::vector<SweepCandidate>(grid.size()));
  const std::size_t jobs = strategies.size() * grid.size();
  parallel_for(jobs, workers, [&](std::size_t job) {
    const std::size_t s = job / grid.size(), g = job % grid.size();
    RhoParams params{grid[g].H, grid[g].S, grid[g].budget};
    double obj = 0, time = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::uint64_t run_seed = instance_run_seed(seed, i);
      auto events = events_for(instances[i], online, run_seed);
      RhoResult r = run_rho(instances[i], params, strategies[s], events ? &*events : nullptr,
                            online.noise ? &*online.noise : nullptr, run_seed);
      obj += static_cast<double>(r.report.objective);
      time += r.report.solve_time;
    }
    results[s][g] = {obj / static_cast<double>(instances.size()), time / static_cast<double>(instances.size())};
  });

  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : results)
    for (const auto& c : row) best = std::min(best, c.objective);

  SweepResult out;
  out.points.header = {"method", "point", "H", "S", "objective_mean", "solve_time_mean"};
  out.selected.header = {"method", "point", "H", "S", "objective_mean", "solve_time_mean", "best_objective", "r_s"};
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    const std::string method = strategies[s].name();
    for (std::size_t g = 0; g < grid.size(); ++g)
      out.points.rows.push_back({method, grid[g].label(), std::to_string(grid[g].H), std::to_string(grid[g].S),
                                 num(results[s][g].objective), num(results[s][g].time)});
    const std::size_t k = line_search_select(results[s], best, r_s);
    out.selected.rows.push_back({method, grid[k].label(), std::to_string(grid[k].H), std::to_string(grid[k].S),
                                 num(results[s][k].objective), num(results[s][k].time), num(best),
                                 std::isinf(r_s) ? "inf" : num(r_s)});
  }
  return out;
}

// ---- analyze

namespace {

struct ErrorCounts {
  double fp = 0, fn = 0;
};

}  // namespace

AnalysisReport analyze_dataset(const std::vector<StateRecord>& records, const AnalyzeOptions& options) {
  for (const auto& r : records)
    if (!r.labels) throw ConfigError("dataset lacking labels");
  AnalysisReport rep;
  rep.pfix = empirical_pfix(records, options.W);
  rep.fit = fit_linear_decay(rep.pfix.p);
  const int W = rep.pfix.W;
  const LinearDecay& decay = rep.fit.clamped;

  rep.pfix_table.header = {"i", "x", "p_hat", "stderr", "p_fit"};
  for (int i = 1; i <= W; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    rep.pfix_table.rows.push_back({std::to_string(i), num(static_cast<double>(i) / W), num(rep.pfix.p[k]),
                                   num(rep.pfix.stderr_[k]), num(decay.pfix(i))});
  }

  rep.fit_table.header = {"key", "value"};
  auto kv = [&](const std::string& k, const std::string& v) { rep.fit_table.rows.push_back({k, v}); };
  kv("W", std::to_string(W));
  kv("iterations", std::to_string(rep.pfix.iterations));
  kv("records", std::to_string(rep.pfix.records_used));
  kv("b", num(decay.b));
  kv("m", num(decay.m));
  kv("b_raw", num(rep.fit.raw.b));
  kv("m_raw", num(rep.fit.raw.m));
  kv("slope_stderr", num(rep.fit.slope_stderr));
  kv("t_stat", num(rep.fit.t_stat));
  kv("p_value", opt_num(rep.fit.p_value));
  kv("r_squared", num(rep.fit.r_squared));
  kv("expected_nfix", num(decay.expected_nfix()));

  // Records at the analysed overlap width, for empirical error counts.
  std::vector<const StateRecord*> used;
  for (const auto& r : records)
    if (r.num_overlap() == W) used.push_back(&r);
  std::vector<double> pclip(rep.pfix.p);
  for (double& p : pclip) p = std::clamp(p, 0.0, 1.0);

  rep.errors_table.header = {"method",   "sigma",  "closed_fp", "closed_fn", "closed_alpha", "closed_beta",
                             "mc_fp",    "mc_fn",  "mc_fp_se",  "mc_fn_se",  "empirical_fp", "empirical_fn"};
  auto add_row = [&](const std::string& name, const std::string& sigma, const FixMethod& method, ErrorCounts emp) {
    std::vector<std::string> row = {name, sigma};
    try {
      ErrorPair e = closed_form_errors(method, decay);
      for (auto s : {num(e.expected_fp), num(e.expected_fn), opt_num(e.fpr), opt_num(e.fnr)}) row.push_back(s);
    } catch (const ConfigError&) {
      row.insert(row.end(), 4, "");
    }
    McEstimate mc = monte_carlo_errors(method, pclip, options.mc_trials, options.seed, options.workers);
    for (auto s : {num(mc.fp), num(mc.fn), num(mc.fp_se), num(mc.fn_se), num(emp.fp), num(emp.fn)}) row.push_back(s);
    rep.errors_table.rows.push_back(std::move(row));
  };
  const double n_used = std::max<double>(1.0, static_cast<double>(used.size()));
  for (double sigma : options.sigmas) {
    ErrorCounts random, first;
    const int k = static_cast<int>(std::floor(sigma * W + 1e-9));
    for (const auto* r : used) {
      for (int i = 0; i < W; ++i) {
        const int y = (*r->labels)[static_cast<std::size_t>(i)];
        random.fp += sigma * (1 - y);
        random.fn += (1 - sigma) * y;
        first.fp += (i < k) * (1 - y);
        first.fn += (i >= k) * y;
      }
    }
    add_row("random", num(sigma), RandomFix{sigma}, {random.fp / n_used, random.fn / n_used});
    add_row("first", num(sigma), FirstFix{sigma}, {first.fp / n_used, first.fn / n_used});
  }
  if (options.model) {
    ErrorCounts learned;
    int fp = 0, fn = 0, pos = 0, neg = 0;
    for (const auto* r : used) {
      auto p = forward(*options.model, options.model->normalizer.normalize(*r));
      for (int i = 0; i < W; ++i) {
        const int y = (*r->labels)[static_cast<std::size_t>(i)];
        const bool sel = p[static_cast<std::size_t>(i)] >= options.threshold;
        fp += sel && !y;
        fn += !sel && y;
        pos += y;
        neg += !y;
      }
    }
    learned = {fp / n_used, fn / n_used};
    LearnedFix lf{neg ? static_cast<double>(fp) / neg : 0.0, pos ? static_cast<double>(fn) / pos : 0.0};
    add_row("learned", "", lf, learned);
  }

  rep.plot.header = {"series", "x", "y"};
  for (int i = 1; i <= W; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    const std::string x = num(static_cast<double>(i) / W);
    rep.plot.rows.push_back({"p_hat", x, num(rep.pfix.p[k])});
    rep.plot.rows.push_back({"p_hat_lo", x, num(rep.pfix.p[k] - 2 * rep.pfix.stderr_[k])});
    rep.plot.rows.push_back({"p_hat_hi", x, num(rep.pfix.p[k] + 2 * rep.pfix.stderr_[k])});
    rep.plot.rows.push_back({"p_fit", x, num(decay.pfix(i))});
  }
  return rep;
}

CsvTable analyze_trace(const CsvTable& trace) {
  const std::size_t c_method = trace.column("method"), c_tp = trace.column("tp"), c_fp = trace.column("fp"),
                    c_fn = trace.column("fn"), c_tn = trace.column("tn");
  std::map<std::string, std::array<long, 5>> agg;  // tp fp fn tn iterations
  std::vector<std::string> order;
  for (const auto& row : trace.rows) {
    if (!agg.count(row[c_method])) order.push_back(row[c_method]);
    auto& a = agg[row[c_method]];
    try {
      a[0] += std::stol(row[c_tp]);
      a[1] += std::stol(row[c_fp]);
      a[2] += std::stol(row[c_fn]);
      a[3] += std::stol(row[c_tn]);
    } catch (const std::logic_error&) {
      throw ConfigError("trace has a non-numeric count");
    }
    ++a[4];
  }
  CsvTable t;
  t.header = {"method", "iterations", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "alpha", "beta"};
  for (const auto& m : order) {
    const auto& a = agg[m];
    const long tp = a[0], fp = a[1], fn = a[2], tn = a[3], n = tp + fp + fn + tn;
    auto ratio = [](long x, long d) { return d ? format_double(static_cast<double>(x) / static_cast<double>(d)) : std::string(); };
    t.rows.push_back({m, std::to_string(a[4]), std::to_string(tp), std::to_string(fp), std::to_string(fn),
                      std::to_string(tn), ratio(tp + tn, n), ratio(tp, tp + fp), ratio(tp, tp + fn), ratio(fp, fp + tn),
                      ratio(fn, fn + tp)});
  }
  return t;
}

void write_analysis(const AnalysisReport& report, const fs::path& out_dir) {
  save_csv(out_dir / "pfix.csv", report.pfix_table);
  save_csv(out_dir / "fit.csv", report.fit_table);
  save_csv(out_dir / "errors.csv", report.errors_table);
  save_csv(out_dir / "plot.csv", report.plot);
}

}  // namespace lrho
