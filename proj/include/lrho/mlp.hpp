#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrho/features.hpp"

namespace lrho {

struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;

  Linear() = default;
  Linear(int in_dim, int out_dim) : in(in_dim), out(out_dim), w(static_cast<std::size_t>(in_dim) * out_dim), b(out_dim) {}
  std::size_t size() const { return w.size() + b.size(); }
  friend bool operator==(const Linear&, const Linear&) = default;
};

// Per-column standardization fitted on training records.
struct Normalizer {
  static constexpr double kMinStd = 1e-6;
  std::vector<double> op_mean, op_std, machine_mean, machine_std;

  bool fitted() const { return !op_mean.empty(); }
  void fit(std::span<const StateRecord> records);
  StateRecord normalize(const StateRecord& rec) const;
  StateRecord denormalize(const StateRecord& rec) const;
  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

// Op and machine embeddings (two layers each), fusion of [op | prev machine | mean pool], sigmoid head.
struct MlpModel {
  FeatureVariant variant = FeatureVariant::Makespan;
  int hidden = 64;
  Linear op1, op2, m1, m2, fuse, head;
  Normalizer normalizer;

  static MlpModel init(FeatureVariant variant, std::uint64_t seed, int hidden = 64);
  static constexpr int kLayers = 6;
  Linear& layer(int i);
  const Linear& layer(int i) const;
  MlpModel zeros_like() const;
  std::size_t num_parameters() const;
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// Probabilities per overlap op; expects an already normalized record.
std::vector<double> forward(const MlpModel& model, const StateRecord& record);

enum class LossForm {
  PositiveWeighted,  // -[w_pos*y*log p + (1-y)*log(1-p)]
  BracketWeighted,   // -w_pos*[y*log p + (1-y)*log(1-p)]
};

// Sum of per-op losses over one normalized record; accumulates d(sum)/d(theta) into grad when given.
double loss_sum_and_grad(const MlpModel& model, const StateRecord& record, std::span<const int> labels, double w_pos,
                         MlpModel* grad, LossForm form = LossForm::PositiveWeighted);

// Mean per-op loss over the record, gradients of that mean.
double loss_and_grad(const MlpModel& model, const StateRecord& record, std::span<const int> labels, double w_pos,
                     MlpModel* grad, LossForm form = LossForm::PositiveWeighted);

}  // namespace lrho
