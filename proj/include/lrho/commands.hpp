#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lrho/analysis.hpp"
#include "lrho/core.hpp"
#include "lrho/gen.hpp"
#include "lrho/io.hpp"
#include "lrho/learn.hpp"
#include "lrho/rho.hpp"

namespace lrho {

namespace fs = std::filesystem;

struct DistributionSpec {
  std::string family = "delay";  // makespan | delay
  ObjectiveKind objective = ObjectiveKind::TotalStartDelay;
  int machines = 5;
  int jobs = 8;
  int ops_per_job = 10;

  void validate() const;
};

FjspInstance generate_instance(const DistributionSpec& spec, std::uint64_t seed);
std::string instance_file_name(const DistributionSpec& spec, std::uint64_t seed);

// Breakdowns and observation noise applied to every run of a command.
struct OnlineSettings {
  std::optional<BreakdownIntensity> breakdowns;
  std::optional<NoiseModel> noise;

  bool any() const { return breakdowns || noise; }
};

// Events are drawn per run from the run seed, over a horizon that covers any serial schedule.
Time breakdown_horizon(const FjspInstance& inst);
std::optional<BreakdownSchedule> events_for(const FjspInstance& inst, const OnlineSettings& online, std::uint64_t run_seed);
FeatureVariant variant_for_run(const FjspInstance& inst, const OnlineSettings& online);

// Writes one instance file per seed; returns the paths in seed order.
std::vector<fs::path> cmd_gen(const DistributionSpec& spec, const std::vector<std::uint64_t>& seeds, const fs::path& out_dir);

struct SolveOutcome {
  RhoResult result;
  std::vector<Violation> violations;  // filled when verification ran
};

struct SolveOptions {
  std::optional<fs::path> solution_out;
  std::optional<fs::path> report_csv;  // one row appended
  bool verify = false;
};

SolveOutcome cmd_solve(const FjspInstance& inst, const std::string& instance_name, const RhoParams& params,
                       const FixStrategy& strategy, const OnlineSettings& online, std::uint64_t seed,
                       const SolveOptions& options = {});

// Feasibility of a solution against its instance (true durations).
std::vector<Violation> verify_solution(const FjspInstance& inst, const Solution& sol);

struct CollectResult {
  FeatureVariant variant = FeatureVariant::Makespan;
  std::vector<StateRecord> records;
};

// Oracle-labelled dataset over instances (record.instance = position in the list).
CollectResult cmd_collect(const std::vector<FjspInstance>& instances, const RhoParams& params, int Q,
                          const OnlineSettings& online, std::uint64_t seed, int workers,
                          std::optional<FeatureVariant> variant = std::nullopt);

// Trains on a dataset; rejects datasets whose schema differs from the expected variant.
TrainResult cmd_train(const Dataset& dataset, const TrainConfig& config, std::optional<FeatureVariant> expected = std::nullopt);
CsvTable train_log_table(const TrainResult& result);

struct EvalRun {
  int instance = 0;
  std::string instance_name;
  std::string method;
  RunReport report;
  std::vector<IterationRecord> trace;
};

struct EvalResult {
  std::vector<EvalRun> runs;  // sorted by (instance, strategy position); Default first per instance
  CsvTable per_run;
  CsvTable summary;
  CsvTable trace;  // per-iteration fix-set confusion against the oracle, when one ran
};

// Every strategy runs on every instance with the same run seed; Default RHO is always the baseline.
// shadow_oracle_q > 0 scores every strategy's fix sets against a look-ahead oracle (not timed).
EvalResult cmd_eval(const std::vector<FjspInstance>& instances, const std::vector<std::string>& names,
                    const RhoParams& params, const std::vector<FixStrategy>& strategies, const OnlineSettings& online,
                    std::uint64_t seed, int workers, int shadow_oracle_q = 0);

// Column documentation for the eval CSV files.
const std::vector<std::string>& eval_columns();
const std::vector<std::string>& eval_summary_columns();

struct SweepPoint {
  int H = 0;
  int S = 0;
  Budget budget;
  std::string label() const;
};

// (H,S) pairs x (T, T_es) pairs; in move mode each T, T_es becomes moves_per_second * seconds.
std::vector<SweepPoint> default_sweep_grid(Budget::Mode mode, double moves_per_second);
// "H:S:moves:MAX:STALL" or "H:S:time:T:TES", separated by ';'.
std::vector<SweepPoint> parse_sweep_grid(const std::string& text);

struct SweepCandidate {
  double objective = 0.0;
  double time = 0.0;
};

// Bucketed line search: walk buckets [(1 + r_s i) obj*, (1 + r_s (i+1)) obj*] from i = 0 and return the
// fastest candidate in the first nonempty one. r_s = infinity puts every candidate in one bucket.
std::size_t line_search_select(const std::vector<SweepCandidate>& candidates, double best_objective, double r_s);

struct SweepResult {
  CsvTable points;    // method, point, mean objective, mean time
  CsvTable selected;  // best point per method
};

SweepResult cmd_sweep(const std::vector<FjspInstance>& instances, const std::vector<SweepPoint>& grid,
                      const std::vector<FixStrategy>& strategies, std::uint64_t seed, int workers, double r_s = 0.1,
                      const OnlineSettings& online = {});

struct AnalyzeOptions {
  std::vector<double> sigmas{0.2, 0.4, 0.5};
  std::int64_t mc_trials = 100000;
  std::uint64_t seed = 0;
  std::optional<int> W;
  const MlpModel* model = nullptr;  // adds a Learned row from the model's predictions
  double threshold = 0.5;
  int workers = 0;
};

struct AnalysisReport {
  PfixEstimate pfix;
  LinearFit fit;
  CsvTable pfix_table;
  CsvTable fit_table;
  CsvTable errors_table;
  CsvTable plot;  // series,x,y
};

AnalysisReport analyze_dataset(const std::vector<StateRecord>& records, const AnalyzeOptions& options);
// Confusion statistics per method from an eval trace table.
CsvTable analyze_trace(const CsvTable& trace);

void write_analysis(const AnalysisReport& report, const fs::path& out_dir);

}  // namespace lrho
