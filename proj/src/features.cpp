#include "lrho/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lrho {

namespace {

const std::vector<std::string> kMakespanOps = {
    "job_start_time", "avg_dur",      "std_dur",       "min_dur",     "max_dur",
    "job_id",         "ops_id",       "in_overlap",    "prev_machine", "prev_duration",
    "prev_end_time",  "alt_avg_dur",  "alt_std_dur",   "alt_min_dur", "alt_max_dur"};
const std::vector<std::string> kMakespanMachines = {
    "machine_start_time", "num_overlap",  "avg_end_time", "std_end_time", "max_end_time", "min_end_time",
    "avg_duration",       "std_duration", "max_duration", "min_duration", "machine_id"};

const std::vector<std::string> kStartDelayOps = {
    "job_start_time", "ops_release_time", "avg_dur",      "std_dur",      "min_dur",     "max_dur",
    "job_id",         "ops_id",           "in_overlap",   "prev_delay",   "prev_machine", "prev_duration",
    "alt_avg_dur",    "alt_std_dur",      "alt_min_dur",  "alt_max_dur"};
const std::vector<std::string> kDelayMachines = {"machine_start_time", "num_overlap", "avg_delay",
                                                 "std_delay",          "max_delay",   "min_delay"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Stats {
  double avg = -1, std = -1, max = -1, min = -1;
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.avg = sum / static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - s.avg) * (x - s.avg);
  s.std = std::sqrt(var / static_cast<double>(xs.size()));
  s.max = *std::max_element(xs.begin(), xs.end());
  s.min = *std::min_element(xs.begin(), xs.end());
  return s;
}

const DurationOverlay* ptr(const std::optional<DurationOverlay>& o) { return o ? &*o : nullptr; }

}  // namespace

std::string_view to_string(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::Makespan: return "makespan";
    case FeatureVariant::MakespanBreakdown: return "makespan_breakdown";
    case FeatureVariant::StartDelay: return "start_delay";
    case FeatureVariant::StartEndDelay: return "start_end_delay";
    case FeatureVariant::StartEndDelayNoise: return "start_end_delay_noise";
  }
  return "?";
}

FeatureVariant variant_from_string(std::string_view name) {
  for (auto v : {FeatureVariant::Makespan, FeatureVariant::MakespanBreakdown, FeatureVariant::StartDelay,
                 FeatureVariant::StartEndDelay, FeatureVariant::StartEndDelayNoise})
    if (to_string(v) == name) return v;
  throw ConfigError("unknown feature variant: " + std::string(name));
}

FeatureVariant variant_for(ObjectiveKind kind, bool breakdowns, bool noise) {
  switch (kind) {
    case ObjectiveKind::Makespan: return breakdowns ? FeatureVariant::MakespanBreakdown : FeatureVariant::Makespan;
    case ObjectiveKind::TotalStartDelay: return FeatureVariant::StartDelay;
    case ObjectiveKind::StartPlusEndDelay:
      return noise ? FeatureVariant::StartEndDelayNoise : FeatureVariant::StartEndDelay;
  }
  return FeatureVariant::Makespan;
}

ObjectiveKind variant_objective_family(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::Makespan:
    case FeatureVariant::MakespanBreakdown: return ObjectiveKind::Makespan;
    case FeatureVariant::StartDelay: return ObjectiveKind::TotalStartDelay;
    default: return ObjectiveKind::StartPlusEndDelay;
  }
}

void check_variant(FeatureVariant v, ObjectiveKind kind) {
  if (variant_objective_family(v) != kind)
    throw ConfigError("feature variant " + std::string(to_string(v)) + " does not fit objective " +
                      std::string(to_string(kind)));
}

const std::vector<std::string>& op_feature_names(FeatureVariant v) {
  static const std::vector<std::string> breakdown =
      concat(kMakespanOps, {"is_break_down", "is_ops_break_down", "is_ops_recovered"});
  static const std::vector<std::string> start_end = concat(kStartDelayOps, {"ops_target_due_time", "prev_start", "prev_end"});
  static const std::vector<std::string> noise =
      concat(start_end, {"prev_duration_reeval", "prev_end_reeval", "prev_delay_reeval"});
  switch (v) {
    case FeatureVariant::Makespan: return kMakespanOps;
    case FeatureVariant::MakespanBreakdown: return breakdown;
    case FeatureVariant::StartDelay: return kStartDelayOps;
    case FeatureVariant::StartEndDelay: return start_end;
    case FeatureVariant::StartEndDelayNoise: return noise;
  }
  return kMakespanOps;
}

const std::vector<std::string>& machine_feature_names(FeatureVariant v) {
  static const std::vector<std::string> breakdown = concat(kMakespanMachines, {"is_break_down", "is_machine_break_down"});
  static const std::vector<std::string> noise =
      concat(kDelayMachines, {"avg_delay_reeval", "std_delay_reeval", "max_delay_reeval", "min_delay_reeval",
                              "machine_end_time", "machine_end_time_reeval"});
  switch (v) {
    case FeatureVariant::Makespan: return kMakespanMachines;
    case FeatureVariant::MakespanBreakdown: return breakdown;
    case FeatureVariant::StartDelay:
    case FeatureVariant::StartEndDelay: return kDelayMachines;
    case FeatureVariant::StartEndDelayNoise: return noise;
  }
  return kMakespanMachines;
}

std::pair<int, int> feature_dims(FeatureVariant v) {
  return {static_cast<int>(op_feature_names(v).size()), static_cast<int>(machine_feature_names(v).size())};
}

std::vector<int> StateRecord::overlap_rows() const {
  std::vector<int> rows;
  for (std::size_t i = 0; i < overlap_mask.size(); ++i)
    if (overlap_mask[i]) rows.push_back(static_cast<int>(i));
  return rows;
}

void StateRecord::validate() const {
  auto [d_o, d_m] = feature_dims(variant);
  if (op_features.cols != d_o || machine_features.cols != d_m)
    throw ShapeError("feature widths do not match variant " + std::string(to_string(variant)));
  if (static_cast<int>(overlap_mask.size()) != op_features.rows) throw ShapeError("overlap mask length mismatch");
  if (static_cast<int>(overlap_rows().size()) != num_overlap()) throw ShapeError("prev machine index count mismatch");
  for (int m : prev_machine_index)
    if (m < 0 || m >= machine_features.rows) throw ShapeError("prev machine index out of range");
  if (labels && static_cast<int>(labels->size()) != num_overlap()) throw ShapeError("label count mismatch");
}

StateRecord extract_features(const RhoState& state, FeatureVariant variant) {
  const FjspInstance& inst = state.inst();
  check_variant(variant, state.objective);
  if (state.iteration < 2) throw ConfigError("features need a previous iteration");

  const bool breakdown = variant == FeatureVariant::MakespanBreakdown;
  const bool delay = variant != FeatureVariant::Makespan && !breakdown;
  const bool end_delay = variant == FeatureVariant::StartEndDelay || variant == FeatureVariant::StartEndDelayNoise;
  const bool noise = variant == FeatureVariant::StartEndDelayNoise;
  const DurationOverlay* cur = ptr(state.overlay);
  const DurationOverlay* prev = ptr(state.prev_overlay);
  const int M = inst.num_machines();

  auto delay_of = [&](OpId op, Time start, Time end) {
    const Operation& o = inst.op(op);
    Time d = start - o.release_time.value_or(0);
    if (end_delay) d += std::max<Time>(end - o.target_end_time.value_or(0), 0);
    return static_cast<double>(d);
  };

  std::vector<char> in_overlap_flag(static_cast<std::size_t>(inst.num_ops()), 0);
  for (OpId op : state.overlap_ops) in_overlap_flag[static_cast<std::size_t>(op)] = 1;

  StateRecord rec;
  rec.variant = variant;
  rec.iteration = state.iteration;
  auto [d_o, d_m] = feature_dims(variant);
  rec.op_features = Matrix(static_cast<int>(state.plan_ops.size()), d_o, -1.0);
  rec.machine_features = Matrix(M, d_m, -1.0);
  const double any_down = state.down.empty() ? 0.0 : 1.0;

  // Per-machine aggregates over overlap ops by previous assignment.
  std::vector<std::vector<double>> m_end(M), m_dur(M), m_delay(M), m_delay_re(M), m_end_re(M);

  for (std::size_t row = 0; row < state.plan_ops.size(); ++row) {
    OpId op = state.plan_ops[row];
    const Operation& o = inst.op(op);
    const bool ov = in_overlap_flag[static_cast<std::size_t>(op)];
    std::vector<double> durs;
    for (const auto& md : o.compatible) durs.push_back(static_cast<double>(duration_of(inst, op, md.machine, cur)));
    Stats ds = stats_of(durs);

    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(d_o));
    f.push_back(static_cast<double>(state.boundary.job_ready(o.job_id)));
    if (delay) f.push_back(static_cast<double>(o.release_time.value_or(0)));
    f.insert(f.end(), {ds.avg, ds.std, ds.min, ds.max, static_cast<double>(o.job_id + 1),
                       static_cast<double>(o.op_index), ov ? 1.0 : 0.0});

    double prev_machine = -1, prev_dur = -1, prev_start = -1, prev_end = -1, prev_delay = -1;
    double dur_re = -1, end_re = -1, delay_re = -1;
    Stats alt;
    if (ov) {
      MachineId m = state.prev_solution.machine(op);
      Time s = state.prev_solution.start(op);
      Time d = duration_of(inst, op, m, prev);
      Time dre = duration_of(inst, op, m, cur);
      prev_machine = m;
      prev_dur = static_cast<double>(d);
      prev_start = static_cast<double>(s);
      prev_end = static_cast<double>(s + d);
      prev_delay = delay_of(op, s, s + d);
      dur_re = static_cast<double>(dre);
      end_re = static_cast<double>(s + dre);
      delay_re = delay_of(op, s, s + dre);
      std::vector<double> others;
      for (const auto& md : o.compatible)
        if (md.machine != m) others.push_back(static_cast<double>(duration_of(inst, op, md.machine, cur)));
      alt = stats_of(others);
      rec.prev_machine_index.push_back(m);
      m_end[m].push_back(prev_end);
      m_dur[m].push_back(prev_dur);
      m_delay[m].push_back(prev_delay);
      m_delay_re[m].push_back(delay_re);
      m_end_re[m].push_back(end_re);
    }
    rec.overlap_mask.push_back(ov ? 1 : 0);

    if (delay) f.insert(f.end(), {prev_delay, prev_machine, prev_dur});
    else f.insert(f.end(), {prev_machine, prev_dur, prev_end});
    f.insert(f.end(), {alt.avg, alt.std, alt.min, alt.max});
    if (breakdown) {
      double ops_down = ov && state.down.count(static_cast<MachineId>(prev_machine)) ? 1.0 : 0.0;
      bool recovered = false;
      if (ov)
        for (const auto& md : o.compatible)
          recovered |= state.prev_down.count(md.machine) && !state.down.count(md.machine);
      f.insert(f.end(), {any_down, ops_down, recovered ? 1.0 : 0.0});
    }
    if (end_delay) f.insert(f.end(), {static_cast<double>(o.target_end_time.value_or(0)), prev_start, prev_end});
    if (noise) f.insert(f.end(), {dur_re, end_re, delay_re});
    for (int c = 0; c < d_o; ++c) rec.op_features(static_cast<int>(row), c) = f[static_cast<std::size_t>(c)];
  }

  for (MachineId m = 0; m < M; ++m) {
    std::vector<double> f;
    f.push_back(static_cast<double>(state.boundary.machine_ready(m)));
    f.push_back(static_cast<double>(m_end[m].size()));
    if (delay) {
      Stats s = stats_of(m_delay[m]);
      f.insert(f.end(), {s.avg, s.std, s.max, s.min});
      if (noise) {
        Stats r = stats_of(m_delay_re[m]);
        f.insert(f.end(), {r.avg, r.std, r.max, r.min, stats_of(m_end[m]).max, stats_of(m_end_re[m]).max});
      }
    } else {
      Stats e = stats_of(m_end[m]);
      Stats d = stats_of(m_dur[m]);
      f.insert(f.end(), {e.avg, e.std, e.max, e.min, d.avg, d.std, d.max, d.min, static_cast<double>(m)});
      if (breakdown) f.insert(f.end(), {any_down, state.down.count(m) ? 1.0 : 0.0});
    }
    for (int c = 0; c < d_m; ++c) rec.machine_features(m, c) = f[static_cast<std::size_t>(c)];
  }
  return rec;
}

}  // namespace lrho
