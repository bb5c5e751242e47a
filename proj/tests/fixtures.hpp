#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests. The oracles here
// deliberately avoid the library's decoder, objective and feasibility code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lrho/core.hpp"
#include "lrho/features.hpp"
#include "lrho/gen.hpp"
#include "lrho/mlp.hpp"
#include "lrho/rng.hpp"

namespace fixtures {

using lrho::FjspInstance;
using lrho::MachineDuration;
using lrho::ObjectiveKind;
using lrho::Operation;
using lrho::Time;

inline Operation op(int job, int k, std::vector<MachineDuration> compat, std::optional<Time> release = std::nullopt,
                    std::optional<Time> target = std::nullopt) {
  Operation o;
  o.job_id = job;
  o.op_index = k;
  o.compatible = std::move(compat);
  o.release_time = release;
  o.target_end_time = target;
  return o;
}

// T1: 2 machines, 2 jobs x 2 ops.
inline FjspInstance t1(ObjectiveKind kind = ObjectiveKind::Makespan) {
  bool delay = lrho::is_delay_objective(kind);
  auto r = [&](Time v) { return delay ? std::optional<Time>(v) : std::nullopt; };
  std::vector<std::vector<Operation>> jobs{
      {op(0, 1, {{0, 3}, {1, 5}}, r(0), r(4)), op(0, 2, {{0, 4}, {1, 2}}, r(1), r(8))},
      {op(1, 1, {{0, 2}, {1, 4}}, r(0), r(3)), op(1, 2, {{0, 3}, {1, 3}}, r(2), r(7))},
  };
  return FjspInstance(2, jobs, kind);
}

// Small random instance with at most 8 ops; family chosen by seed.
inline FjspInstance tiny(std::uint64_t seed) {
  switch (seed % 4) {
    case 0: return lrho::gen_makespan_instance(seed, 3, 2, 4);
    case 1: return lrho::gen_makespan_instance(seed, 3, 4, 2);
    case 2: return lrho::gen_delay_instance(seed, 3, 2, 4, ObjectiveKind::TotalStartDelay);
    default: return lrho::gen_delay_instance(seed, 2, 4, 2, ObjectiveKind::StartPlusEndDelay);
  }
}

struct Assigned {
  int machine = -1;
  Time start = 0;
  Time dur = 0;
};

// Objective of a full schedule, computed straight from the definitions.
inline Time objective_of(const FjspInstance& inst, const std::vector<Assigned>& a) {
  Time v = 0;
  for (int i = 0; i < inst.num_ops(); ++i) {
    const Operation& o = inst.op(i);
    Time end = a[i].start + a[i].dur;
    switch (inst.objective()) {
      case ObjectiveKind::Makespan: v = std::max(v, end); break;
      case ObjectiveKind::TotalStartDelay: v += a[i].start - *o.release_time; break;
      case ObjectiveKind::StartPlusEndDelay:
        v += a[i].start - *o.release_time + std::max<Time>(0, end - *o.target_end_time);
        break;
    }
  }
  return v;
}

// Exhaustive search over every interleaving of the job chains and every machine choice, each op
// appended at the earliest time after its job predecessor, its machine's last op and its release.
// Sorting any semi-active schedule by start gives such an interleaving, so the minimum is optimal.
inline Time brute_force_optimum(const FjspInstance& inst) {
  const int J = inst.num_jobs();
  std::vector<int> next(J, 1);
  std::vector<Time> job_ready(J, 0), mach_free(inst.num_machines(), 0);
  std::vector<Assigned> a(inst.num_ops());
  Time best = std::numeric_limits<Time>::max();
  int placed = 0;
  std::function<void()> rec = [&] {
    if (placed == inst.num_ops()) {
      best = std::min(best, objective_of(inst, a));
      return;
    }
    for (int j = 0; j < J; ++j) {
      if (next[j] > inst.job_length(j)) continue;
      int id = inst.op_id(j, next[j]);
      const Operation& o = inst.op(id);
      for (const auto& md : o.compatible) {
        Time s = std::max({job_ready[j], mach_free[md.machine], o.release_time.value_or(0)});
        Time saved_job = job_ready[j], saved_m = mach_free[md.machine];
        a[id] = {md.machine, s, md.duration};
        job_ready[j] = mach_free[md.machine] = s + md.duration;
        ++next[j];
        ++placed;
        rec();
        --placed;
        --next[j];
        job_ready[j] = saved_job;
        mach_free[md.machine] = saved_m;
      }
    }
  };
  rec();
  return best;
}

// Exhaustive search over machine choices and every integer start in [0, horizon - duration].
inline Time start_time_optimum(const FjspInstance& inst, Time horizon) {
  const int n = inst.num_ops();
  std::vector<Assigned> a(n);
  Time best = std::numeric_limits<Time>::max();
  auto ok = [&](int i) {
    const Operation& o = inst.op(i);
    if (o.release_time && a[i].start < *o.release_time) return false;
    if (o.op_index > 1 && a[i - 1].start + a[i - 1].dur > a[i].start) return false;
    for (int k = 0; k < i; ++k)
      if (a[k].machine == a[i].machine && a[k].start < a[i].start + a[i].dur && a[i].start < a[k].start + a[k].dur)
        return false;
    return true;
  };
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      best = std::min(best, objective_of(inst, a));
      return;
    }
    for (const auto& md : inst.op(i).compatible)
      for (Time s = 0; s + md.duration <= horizon; ++s) {
        a[i] = {md.machine, s, md.duration};
        if (ok(i)) rec(i + 1);
      }
  };
  rec(0);
  return best;
}

// Records with random features. Labels follow the sign of op feature 0 plus Gaussian label noise
// of the given scale (0 gives a separable dataset).
inline std::vector<lrho::StateRecord> synthetic_records(std::uint64_t seed, int count, double label_noise,
                                                        lrho::FeatureVariant variant = lrho::FeatureVariant::StartDelay) {
  auto [d_o, d_m] = lrho::feature_dims(variant);
  lrho::Rng rng(seed);
  std::vector<lrho::StateRecord> out;
  for (int n = 0; n < count; ++n) {
    lrho::StateRecord r;
    r.variant = variant;
    r.instance = n;
    r.iteration = 2;
    const int rows = 12, overlap = 6, machines = 4;
    r.op_features = lrho::Matrix(rows, d_o);
    r.machine_features = lrho::Matrix(machines, d_m);
    for (double& v : r.op_features.data) v = rng.normal();
    for (double& v : r.machine_features.data) v = rng.normal();
    r.overlap_mask.assign(rows, 0);
    std::vector<int> labels;
    for (int i = 0; i < overlap; ++i) {
      r.overlap_mask[i] = 1;
      r.prev_machine_index.push_back(static_cast<int>(rng.uniform_int(0, machines - 1)));
      labels.push_back(r.op_features(i, 0) + label_noise * rng.normal() > 0 ? 1 : 0);
    }
    r.labels = labels;
    out.push_back(std::move(r));
  }
  return out;
}

// Random record of the given variant with `overlap` overlap rows spread over the plan rows.
inline lrho::StateRecord random_record(lrho::Rng& rng, lrho::FeatureVariant variant, int rows, int overlap, int machines) {
  auto [d_o, d_m] = lrho::feature_dims(variant);
  lrho::StateRecord r;
  r.variant = variant;
  r.op_features = lrho::Matrix(rows, d_o);
  r.machine_features = lrho::Matrix(machines, d_m);
  for (double& v : r.op_features.data) v = rng.normal();
  for (double& v : r.machine_features.data) v = rng.normal();
  std::vector<int> idx(rows);
  for (int i = 0; i < rows; ++i) idx[i] = i;
  rng.shuffle(idx);
  r.overlap_mask.assign(rows, 0);
  for (int i = 0; i < overlap; ++i) r.overlap_mask[idx[i]] = 1;
  std::vector<int> labels;
  for (int i = 0; i < overlap; ++i) {
    r.prev_machine_index.push_back(static_cast<int>(rng.uniform_int(0, machines - 1)));
    labels.push_back(static_cast<int>(rng.uniform_int(0, 1)));
  }
  r.labels = labels;
  return r;
}

// Largest relative gap between analytic and central-difference gradients over every parameter.
// Relative gaps use max(|analytic|, |numeric|, 1e-5) as the denominator.
inline double gradient_check(const lrho::MlpModel& model, const lrho::StateRecord& rec, double w_pos,
                             lrho::LossForm form, double h = 1e-6) {
  const auto& y = *rec.labels;
  lrho::MlpModel grad = model.zeros_like();
  lrho::loss_sum_and_grad(model, rec, y, w_pos, &grad, form);
  lrho::MlpModel probe = model;
  double worst = 0;
  for (int l = 0; l < lrho::MlpModel::kLayers; ++l) {
    auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      for (std::size_t k = 0; k < params.size(); ++k) {
        double saved = params[k];
        params[k] = saved + h;
        double up = lrho::loss_sum_and_grad(probe, rec, y, w_pos, nullptr, form);
        params[k] = saved - h;
        double down = lrho::loss_sum_and_grad(probe, rec, y, w_pos, nullptr, form);
        params[k] = saved;
        double numeric = (up - down) / (2 * h);
        double denom = std::max({std::abs(analytic[k]), std::abs(numeric), 1e-5});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
      }
    };
    check(probe.layer(l).w, grad.layer(l).w);
    check(probe.layer(l).b, grad.layer(l).b);
  }
  return worst;
}

}  // namespace fixtures
