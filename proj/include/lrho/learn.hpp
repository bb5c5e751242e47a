#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lrho/features.hpp"
#include "lrho/mlp.hpp"
#include "lrho/rho.hpp"

namespace lrho {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;  // records per step
  double w_pos = 0.5;
  std::int64_t steps = 500000;
  std::uint64_t seed = 0;
  int hidden = 64;
  int eval_every = 200;
  double val_fraction = 0.05;
  LossForm loss_form = LossForm::PositiveWeighted;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void validate() const;
};

struct ClassifierMetrics {
  double loss = 0.0;
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy() const;
  std::optional<double> tpr() const;
  std::optional<double> tnr() const;
  std::optional<double> precision() const;
};

struct TrainLogEntry {
  std::int64_t step = 0;
  double train_loss = 0.0;
  ClassifierMetrics train;
  std::optional<ClassifierMetrics> validation;
};

struct TrainResult {
  MlpModel model;
  std::vector<TrainLogEntry> log;
  std::int64_t best_step = 0;
};

// Records must carry labels and share one variant; validation takes the last instances by id.
TrainResult train(const std::vector<StateRecord>& dataset, const TrainConfig& config);

// Metrics of thresholded predictions on raw (unnormalized) labeled records.
ClassifierMetrics evaluate_classifier(const MlpModel& model, const std::vector<StateRecord>& records, double w_pos,
                                      double threshold = 0.5, LossForm form = LossForm::PositiveWeighted);

class LearnedPredictor : public FixPredictor {
 public:
  explicit LearnedPredictor(MlpModel model) : model_(std::move(model)) {}
  std::vector<double> predict(const RhoState& state) const override;
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

struct CollectOptions {
  FeatureVariant variant = FeatureVariant::StartDelay;
  const BreakdownSchedule* events = nullptr;  // shared across instances when set
  // Per-instance events from (instance index, run seed); takes precedence over `events`.
  std::function<std::optional<BreakdownSchedule>(std::size_t, std::uint64_t)> make_events;
  const NoiseModel* noise = nullptr;
  int workers = 0;  // 0: LRHO_WORKERS or hardware concurrency
};

// Oracle-driven rollouts; one labeled record per iteration r >= 2 per instance, sorted by (instance, iteration).
std::vector<StateRecord> collect_labels(const std::vector<FjspInstance>& instances, const RhoParams& params, int Q,
                                        std::uint64_t seed, const CollectOptions& options);

// Seed used for instance i of a batch run.
std::uint64_t instance_run_seed(std::uint64_t seed, std::size_t i);

// Worker count from LRHO_WORKERS, falling back to hardware concurrency.
int default_workers();

// Runs fn(i) for i in [0, n) on a bounded pool. Exceptions propagate (first one wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace lrho
