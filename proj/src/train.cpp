#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lrho/learn.hpp"
#include "lrho/rng.hpp"

namespace lrho {

void TrainConfig::validate() const {
  if (!(w_pos > 0)) throw ConfigError("w_pos must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (eval_every < 1) throw ConfigError("eval interval must be >= 1");
  if (!(val_fraction >= 0 && val_fraction < 1)) throw ConfigError("validation fraction must lie in [0, 1)");
}

double ClassifierMetrics::accuracy() const {
  int n = tp + fp + fn + tn;
  return n ? static_cast<double>(tp + tn) / n : 0.0;
}
std::optional<double> ClassifierMetrics::tpr() const {
  return tp + fn ? std::optional<double>(static_cast<double>(tp) / (tp + fn)) : std::nullopt;
}
std::optional<double> ClassifierMetrics::tnr() const {
  return tn + fp ? std::optional<double>(static_cast<double>(tn) / (tn + fp)) : std::nullopt;
}
std::optional<double> ClassifierMetrics::precision() const {
  return tp + fp ? std::optional<double>(static_cast<double>(tp) / (tp + fp)) : std::nullopt;
}

namespace {

ClassifierMetrics metrics_normalized(const MlpModel& model, const std::vector<StateRecord>& records, double w_pos,
                                     double threshold, LossForm form) {
  ClassifierMetrics m;
  double loss = 0.0;
  std::size_t count = 0;
  for (const auto& rec : records) {
    if (rec.num_overlap() == 0) continue;
    const auto& y = *rec.labels;
    loss += loss_sum_and_grad(model, rec, y, w_pos, nullptr, form);
    count += y.size();
    std::vector<double> p = forward(model, rec);
    for (std::size_t k = 0; k < p.size(); ++k) {
      bool pred = p[k] >= threshold;
      if (pred && y[k]) ++m.tp;
      else if (pred) ++m.fp;
      else if (y[k]) ++m.fn;
      else ++m.tn;
    }
  }
  m.loss = count ? loss / static_cast<double>(count) : 0.0;
  return m;
}

struct Adam {
  std::vector<std::vector<double>> m, v;
  std::int64_t t = 0;
};

}  // namespace

ClassifierMetrics evaluate_classifier(const MlpModel& model, const std::vector<StateRecord>& records, double w_pos,
                                      double threshold, LossForm form) {
  std::vector<StateRecord> norm;
  norm.reserve(records.size());
  for (const auto& r : records) {
    if (!r.labels) throw ConfigError("record has no labels");
    norm.push_back(model.normalizer.normalize(r));
  }
  return metrics_normalized(model, norm, w_pos, threshold, form);
}

TrainResult train(const std::vector<StateRecord>& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw InsufficientDataError("training needs at least one record");
  const FeatureVariant variant = dataset.front().variant;
  std::set<int> instance_ids;
  for (const auto& r : dataset) {
    if (r.variant != variant) throw ConfigError("dataset mixes feature variants");
    if (!r.labels) throw ConfigError("training record has no labels");
    r.validate();
    instance_ids.insert(r.instance);
  }

  std::size_t n_val = 0;
  if (instance_ids.size() >= 2 && config.val_fraction > 0)
    n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config.val_fraction * instance_ids.size() - 1e-9)));
  std::set<int> val_ids(std::prev(instance_ids.end(), static_cast<std::ptrdiff_t>(n_val)), instance_ids.end());
  std::vector<StateRecord> train_set, val_set;
  for (const auto& r : dataset) (val_ids.count(r.instance) ? val_set : train_set).push_back(r);

  TrainResult result;
  result.model = MlpModel::init(variant, config.seed, config.hidden);
  MlpModel& model = result.model;
  model.normalizer.fit(train_set);
  for (auto& r : train_set) r = model.normalizer.normalize(r);
  for (auto& r : val_set) r = model.normalizer.normalize(r);

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train_set.size(); ++i)
    if (train_set[i].num_overlap() > 0) usable.push_back(i);
  if (config.steps == 0 || usable.empty()) return result;

  Rng rng(derive_seed(config.seed, Stream::Training, {1}));
  Adam adam;
  for (int l = 0; l < MlpModel::kLayers; ++l) {
    adam.m.emplace_back(model.layer(l).size(), 0.0);
    adam.v.emplace_back(model.layer(l).size(), 0.0);
  }
  std::vector<std::size_t> order = usable;
  std::size_t cursor = order.size();
  double best_val = std::numeric_limits<double>::infinity();
  MlpModel best = model;
  double running = 0.0;
  int running_n = 0;

  for (std::int64_t step = 1; step <= config.steps; ++step) {
    MlpModel grad = model.zeros_like();
    double loss = 0.0;
    std::size_t ops = 0;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor >= order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      const StateRecord& rec = train_set[order[cursor++]];
      loss += loss_sum_and_grad(model, rec, *rec.labels, config.w_pos, &grad, config.loss_form);
      ops += rec.labels->size();
    }
    const double scale = 1.0 / static_cast<double>(ops);
    ++adam.t;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam.t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam.t));
    for (int l = 0; l < MlpModel::kLayers; ++l) {
      Linear& p = model.layer(l);
      const Linear& g = grad.layer(l);
      auto& m = adam.m[l];
      auto& v = adam.v[l];
      auto update = [&](double& param, double gr, std::size_t k) {
        gr *= scale;
        m[k] = config.beta1 * m[k] + (1 - config.beta1) * gr;
        v[k] = config.beta2 * v[k] + (1 - config.beta2) * gr * gr;
        param -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.eps);
      };
      for (std::size_t k = 0; k < p.w.size(); ++k) update(p.w[k], g.w[k], k);
      for (std::size_t k = 0; k < p.b.size(); ++k) update(p.b[k], g.b[k], p.w.size() + k);
    }
    running += loss * scale;
    ++running_n;

    if (step % config.eval_every == 0 || step == config.steps) {
      TrainLogEntry e;
      e.step = step;
      e.train_loss = running / running_n;
      running = 0.0;
      running_n = 0;
      e.train = metrics_normalized(model, train_set, config.w_pos, 0.5, config.loss_form);
      if (!val_set.empty()) {
        e.validation = metrics_normalized(model, val_set, config.w_pos, 0.5, config.loss_form);
        if (e.validation->loss < best_val) {
          best_val = e.validation->loss;
          best = model;
          result.best_step = step;
        }
      }
      result.log.push_back(e);
    }
  }
  if (!val_set.empty()) model = best;
  else result.best_step = config.steps;
  return result;
}

std::vector<double> LearnedPredictor::predict(const RhoState& state) const {
  if (state.overlap_ops.empty()) return {};
  StateRecord rec = extract_features(state, model_.variant);
  return forward(model_, model_.normalizer.normalize(rec));
}

}  // namespace lrho
