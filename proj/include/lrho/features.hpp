#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lrho/core.hpp"
#include "lrho/rho.hpp"

namespace lrho {

enum class FeatureVariant { Makespan, MakespanBreakdown, StartDelay, StartEndDelay, StartEndDelayNoise };

std::string_view to_string(FeatureVariant v);
FeatureVariant variant_from_string(std::string_view name);
// Variant used for an objective under the given online settings.
FeatureVariant variant_for(ObjectiveKind kind, bool breakdowns, bool noise);
ObjectiveKind variant_objective_family(FeatureVariant v);
void check_variant(FeatureVariant v, ObjectiveKind kind);

const std::vector<std::string>& op_feature_names(FeatureVariant v);
const std::vector<std::string>& machine_feature_names(FeatureVariant v);
// (d_o, d_m)
std::pair<int, int> feature_dims(FeatureVariant v);

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct StateRecord {
  FeatureVariant variant = FeatureVariant::Makespan;
  int instance = 0;
  int iteration = 0;
  Matrix op_features;       // one row per plan op, plan order
  Matrix machine_features;  // one row per machine
  std::vector<char> overlap_mask;
  std::vector<int> prev_machine_index;  // one per overlap op, in row order
  std::optional<std::vector<int>> labels;

  int num_overlap() const { return static_cast<int>(prev_machine_index.size()); }
  std::vector<int> overlap_rows() const;
  void validate() const;
  friend bool operator==(const StateRecord&, const StateRecord&) = default;
};

StateRecord extract_features(const RhoState& state, FeatureVariant variant);

}  // namespace lrho
