#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrho/commands.hpp"

using namespace lrho;

namespace {

struct UsageError : Error {
  using Error::Error;
};
struct VerificationFailure : Error {
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) next = s.size();
    if (next > pos) out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

// "moves:MAX[:STALL]" or "time:T[:TES]"; the stall defaults to the limit.
Budget parse_budget(const std::string& text) {
  auto f = split(text, ':');
  if (f.size() < 2 || f.size() > 3) throw UsageError("budget must be moves:MAX[:STALL] or time:T[:TES]");
  try {
    Budget b;
    if (f[0] == "moves") b = Budget::move_count(std::stoll(f[1]), f.size() == 3 ? std::stoll(f[2]) : std::stoll(f[1]));
    else if (f[0] == "time") b = Budget::wall_clock(std::stod(f[1]), f.size() == 3 ? std::stod(f[2]) : std::stod(f[1]));
    else throw UsageError("budget kind must be moves or time");
    b.validate();
    return b;
  } catch (const std::logic_error&) {
    throw UsageError("bad number in budget '" + text + "'");
  }
}

// "0..9" ranges and comma lists.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    try {
      auto dots = part.find("..");
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(part));
        continue;
      }
      std::uint64_t lo = std::stoull(part.substr(0, dots)), hi = std::stoull(part.substr(dots + 2));
      if (hi < lo) throw UsageError("empty seed range " + part);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } catch (const std::logic_error&) {
      throw UsageError("bad seed list '" + text + "'");
    }
  }
  return seeds;
}

// Files as given; directories contribute their *.json files in name order.
std::vector<fs::path> expand_instances(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  int workers = 0;
  int H = 80;
  int S = 30;
  std::string budget = "time:60:3";
  std::string breakdowns;
  bool noise = false;
  double noise_eps = 0.2;

  void add(CLI::App* app, bool rho = true) {
    app->add_option("--seed", seed, "Base random seed");
    app->add_option("--workers", workers, "Worker threads (default: LRHO_WORKERS or all cores)");
    if (!rho) return;
    app->add_option("--H", H, "Planning window size (operations)");
    app->add_option("--S", S, "Execution step size (operations)");
    app->add_option("--budget", budget, "Subsolver budget: moves:MAX[:STALL] or time:T[:TES]");
    app->add_option("--breakdowns", breakdowns, "Machine breakdowns: low | mid | high");
    app->add_flag("--noise", noise, "Observation noise on durations");
    app->add_option("--noise-eps", noise_eps, "Probability that an op's observed durations are perturbed");
  }
  RhoParams params() const {
    RhoParams p{H, S, parse_budget(budget)};
    p.validate();
    return p;
  }
  OnlineSettings online() const {
    OnlineSettings o;
    if (!breakdowns.empty()) o.breakdowns = BreakdownIntensity::from_name(breakdowns);
    if (noise) {
      NoiseModel n;
      n.epsilon = noise_eps;
      o.noise = n;
    }
    return o;
  }
};

std::vector<FjspInstance> load_all(const std::vector<fs::path>& paths, std::vector<std::string>* names) {
  std::vector<FjspInstance> out;
  for (const auto& p : paths) {
    out.push_back(load_instance(p));
    if (names) names->push_back(p.stem().string());
  }
  return out;
}

FixStrategy strategy_with_model(const std::string& text, const std::string& model_path) {
  FixStrategy s = FixStrategy::parse(text);
  if (s.kind == FixStrategy::Kind::Learned) {
    if (model_path.empty()) throw UsageError("strategy " + text + " needs --model");
    s = FixStrategy::learned(std::make_shared<LearnedPredictor>(load_model(model_path)), s.threshold);
  }
  s.validate();
  return s;
}

void write_or_print(const std::string& path, const CsvTable& table) {
  if (path.empty()) std::cout << csv_to_text(table);
  else save_csv(path, table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rolling-horizon flexible job-shop toolkit with learned assignment fixing"};
  app.require_subcommand(1);

  // gen
  DistributionSpec dist;
  std::string objective = "start_delay", seeds_text, gen_out = "instances";
  auto* gen = app.add_subcommand("gen", "Generate instance files");
  gen->add_option("--family", dist.family, "makespan | delay")->capture_default_str();
  gen->add_option("--objective", objective, "makespan | start_delay | start_end_delay")->capture_default_str();
  gen->add_option("--machines", dist.machines)->capture_default_str();
  gen->add_option("--jobs", dist.jobs)->capture_default_str();
  gen->add_option("--ops", dist.ops_per_job, "Operations per job")->capture_default_str();
  gen->add_option("--seeds", seeds_text, "Seeds, e.g. 0..9 or 1,4,7")->required();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // solve
  Common solve_c;
  std::string solve_instance, solve_strategy = "default", solve_model, solve_out, solve_report;
  bool solve_verify = false;
  auto* solve = app.add_subcommand("solve", "Run RHO with one strategy on one instance");
  solve_c.add(solve);
  solve->add_option("instance", solve_instance, "Instance file")->required();
  solve->add_option("--strategy", solve_strategy, "default | warmstart | first:s | random:s | oracle:Q | learned[:thr]");
  solve->add_option("--model", solve_model, "Model file for the learned strategy");
  solve->add_option("--out", solve_out, "Solution file");
  solve->add_option("--report", solve_report, "CSV file to append the run report to");
  solve->add_flag("--verify", solve_verify, "Check feasibility of the final schedule (exit 2 on violations)");

  // collect
  Common collect_c;
  std::vector<std::string> collect_in;
  int collect_q = 3;
  std::string collect_out = "dataset.jsonl", collect_variant;
  auto* collect = app.add_subcommand("collect", "Collect oracle-labelled training data");
  collect_c.add(collect);
  collect->add_option("instances", collect_in, "Instance files or directories")->required();
  collect->add_option("--Q", collect_q, "Oracle solves per iteration")->capture_default_str();
  collect->add_option("--variant", collect_variant, "Feature variant (default: from objective and online settings)");
  collect->add_option("--out", collect_out, "Dataset file")->capture_default_str();

  // train
  TrainConfig tc;
  std::string train_data, train_out = "model.json", train_log, train_variant, train_loss = "positive";
  auto* trn = app.add_subcommand("train", "Train the fix classifier");
  trn->add_option("dataset", train_data, "Dataset file")->required();
  trn->add_option("--out", train_out, "Model file")->capture_default_str();
  trn->add_option("--log", train_log, "Training log CSV");
  trn->add_option("--variant", train_variant, "Expected feature variant");
  trn->add_option("--steps", tc.steps)->capture_default_str();
  trn->add_option("--batch", tc.batch_size, "Records per step")->capture_default_str();
  trn->add_option("--lr", tc.learning_rate)->capture_default_str();
  trn->add_option("--w-pos", tc.w_pos, "Weight of positive labels")->capture_default_str();
  trn->add_option("--hidden", tc.hidden)->capture_default_str();
  trn->add_option("--eval-every", tc.eval_every)->capture_default_str();
  trn->add_option("--val-fraction", tc.val_fraction)->capture_default_str();
  trn->add_option("--loss", train_loss, "positive | bracket")->capture_default_str();
  trn->add_option("--seed", tc.seed);

  // eval
  Common eval_c;
  std::vector<std::string> eval_in;
  std::string eval_strategies = "default,first:0.2,random:0.2,warmstart", eval_model, eval_out, eval_summary, eval_trace;
  int eval_shadow = 0;
  auto* eval = app.add_subcommand("eval", "Compare strategies against Default RHO");
  eval_c.add(eval);
  eval->add_option("instances", eval_in, "Instance files or directories")->required();
  eval->add_option("--strategies", eval_strategies, "Comma-separated strategies")->capture_default_str();
  eval->add_option("--model", eval_model, "Model file for the learned strategy");
  eval->add_option("--out", eval_out, "Per-run CSV (default: stdout)");
  eval->add_option("--summary", eval_summary, "Summary CSV");
  eval->add_option("--trace", eval_trace, "Per-iteration fix-set confusion CSV");
  eval->add_option("--shadow-oracle", eval_shadow, "Score fix sets against a Q-solve oracle (untimed)");

  // sweep
  Common sweep_c;
  std::vector<std::string> sweep_in;
  std::string sweep_strategies = "default", sweep_model, sweep_grid, sweep_mode = "moves", sweep_rs = "0.1",
              sweep_out, sweep_selected;
  double sweep_mps = 1000.0;
  auto* sweep = app.add_subcommand("sweep", "Grid search over RHO parameters with bucketed line-search selection");
  sweep_c.add(sweep);
  sweep->add_option("instances", sweep_in, "Instance files or directories")->required();
  sweep->add_option("--strategies", sweep_strategies, "Comma-separated strategies")->capture_default_str();
  sweep->add_option("--model", sweep_model, "Model file for the learned strategy");
  sweep->add_option("--grid", sweep_grid, "Points H:S:moves:MAX:STALL or H:S:time:T:TES separated by ';' (default grid otherwise)");
  sweep->add_option("--mode", sweep_mode, "Default grid budgets: moves | time")->capture_default_str();
  sweep->add_option("--moves-per-second", sweep_mps, "Seconds-to-moves conversion for the default grid")->capture_default_str();
  sweep->add_option("--rs", sweep_rs, "Bucket width relative to the best objective, or inf")->capture_default_str();
  sweep->add_option("--out", sweep_out, "All grid points CSV");
  sweep->add_option("--selected", sweep_selected, "Selected point per strategy CSV (default: stdout)");

  // analyze
  std::string an_dataset, an_trace, an_out = "analysis", an_model, an_sigmas = "0.2,0.4,0.5";
  AnalyzeOptions an;
  int an_w = 0;
  auto* analyze = app.add_subcommand("analyze", "Fix-probability decay and FP/FN error analysis");
  analyze->add_option("--dataset", an_dataset, "Labelled dataset");
  analyze->add_option("--trace", an_trace, "Eval trace CSV");
  analyze->add_option("--out", an_out, "Output directory")->capture_default_str();
  analyze->add_option("--model", an_model, "Model for a learned-method row");
  analyze->add_option("--sigmas", an_sigmas, "Comma-separated sigma values")->capture_default_str();
  analyze->add_option("--trials", an.mc_trials, "Monte Carlo trials")->capture_default_str();
  analyze->add_option("--W", an_w, "Overlap width (default: most common)");
  analyze->add_option("--seed", an.seed);
  analyze->add_option("--workers", an.workers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      dist.objective = objective_from_string(objective);
      auto paths = cmd_gen(dist, parse_seeds(seeds_text), gen_out);
      for (const auto& p : paths) std::cout << p.string() << "\n";
    } else if (*solve) {
      FjspInstance inst = load_instance(solve_instance);
      SolveOptions opt;
      if (!solve_out.empty()) opt.solution_out = solve_out;
      if (!solve_report.empty()) opt.report_csv = solve_report;
      opt.verify = solve_verify;
      auto outcome = cmd_solve(inst, fs::path(solve_instance).stem().string(), solve_c.params(),
                               strategy_with_model(solve_strategy, solve_model), solve_c.online(), solve_c.seed, opt);
      const RunReport& r = outcome.result.report;
      std::cout << r.method << " objective=" << r.objective << " solve_time=" << r.solve_time << " " << r.time_unit
                << " iterations=" << r.iterations << "\n";
      if (!outcome.violations.empty()) {
        for (const auto& v : outcome.violations)
          std::cerr << "violation: " << to_string(v.kind) << " op " << v.op << " " << v.detail << "\n";
        throw VerificationFailure(std::to_string(outcome.violations.size()) + " feasibility violations");
      }
    } else if (*collect) {
      auto instances = load_all(expand_instances(collect_in), nullptr);
      std::optional<FeatureVariant> variant;
      if (!collect_variant.empty()) variant = variant_from_string(collect_variant);
      auto result = cmd_collect(instances, collect_c.params(), collect_q, collect_c.online(), collect_c.seed,
                                collect_c.workers, variant);
      save_dataset(collect_out, result.variant, result.records);
      std::cout << result.records.size() << " records (" << to_string(result.variant) << ") -> " << collect_out << "\n";
    } else if (*trn) {
      if (train_loss == "positive") tc.loss_form = LossForm::PositiveWeighted;
      else if (train_loss == "bracket") tc.loss_form = LossForm::BracketWeighted;
      else throw UsageError("--loss must be positive or bracket");
      std::optional<FeatureVariant> expected;
      if (!train_variant.empty()) expected = variant_from_string(train_variant);
      TrainResult result = cmd_train(load_dataset(train_data), tc, expected);
      save_model(train_out, result.model);
      CsvTable log = train_log_table(result);
      if (!train_log.empty()) save_csv(train_log, log);
      for (const auto& row : log.rows) {
        std::cout << "step " << row[0] << " loss " << row[1] << " acc " << row[2];
        if (!row[7].empty()) std::cout << " val_loss " << row[6] << " val_acc " << row[7];
        std::cout << "\n";
      }
      std::cout << "model -> " << train_out << " (best step " << result.best_step << ")\n";
    } else if (*eval) {
      std::vector<std::string> names;
      auto instances = load_all(expand_instances(eval_in), &names);
      std::vector<FixStrategy> strategies;
      for (const auto& s : split(eval_strategies, ',')) strategies.push_back(strategy_with_model(s, eval_model));
      auto result = cmd_eval(instances, names, eval_c.params(), strategies, eval_c.online(), eval_c.seed,
                             eval_c.workers, eval_shadow);
      write_or_print(eval_out, result.per_run);
      if (!eval_summary.empty()) save_csv(eval_summary, result.summary);
      else if (!eval_out.empty()) std::cout << csv_to_text(result.summary);
      if (!eval_trace.empty()) save_csv(eval_trace, result.trace);
    } else if (*sweep) {
      auto instances = load_all(expand_instances(sweep_in), nullptr);
      std::vector<FixStrategy> strategies;
      for (const auto& s : split(sweep_strategies, ',')) strategies.push_back(strategy_with_model(s, sweep_model));
      std::vector<SweepPoint> grid;
      if (!sweep_grid.empty()) grid = parse_sweep_grid(sweep_grid);
      else if (sweep_mode == "moves") grid = default_sweep_grid(Budget::Mode::MoveCount, sweep_mps);
      else if (sweep_mode == "time") grid = default_sweep_grid(Budget::Mode::WallClock, sweep_mps);
      else throw UsageError("--mode must be moves or time");
      double rs = 0.0;
      if (sweep_rs == "inf") rs = std::numeric_limits<double>::infinity();
      else {
        try {
          rs = std::stod(sweep_rs);
        } catch (const std::logic_error&) {
          throw UsageError("--rs must be a number or inf");
        }
      }
      auto result = cmd_sweep(instances, grid, strategies, sweep_c.seed, sweep_c.workers, rs, sweep_c.online());
      if (!sweep_out.empty()) save_csv(sweep_out, result.points);
      write_or_print(sweep_selected, result.selected);
    } else if (*analyze) {
      if (an_dataset.empty() == an_trace.empty()) throw UsageError("give exactly one of --dataset or --trace");
      if (!an_trace.empty()) {
        CsvTable t = analyze_trace(load_csv(an_trace));
        save_csv(fs::path(an_out) / "confusion.csv", t);
        std::cout << csv_to_text(t);
      } else {
        an.sigmas.clear();
        for (const auto& s : split(an_sigmas, ',')) {
          try {
            an.sigmas.push_back(std::stod(s));
          } catch (const std::logic_error&) {
            throw UsageError("bad sigma '" + s + "'");
          }
        }
        if (an_w > 0) an.W = an_w;
        std::optional<MlpModel> model;
        if (!an_model.empty()) {
          model = load_model(an_model);
          an.model = &*model;
        }
        Dataset ds = load_dataset(an_dataset);
        if (model && model->variant != ds.variant) throw UsageError("model variant differs from the dataset");
        AnalysisReport rep = analyze_dataset(ds.records, an);
        write_analysis(rep, an_out);
        std::cout << csv_to_text(rep.fit_table) << csv_to_text(rep.errors_table);
      }
    }
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
