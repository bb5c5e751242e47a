#include "lrho/gen.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lrho/rng.hpp"

namespace lrho {

FjspInstance gen_makespan_instance(std::uint64_t seed, int num_machines, int num_jobs, int ops_per_job) {
  if (num_machines < 1 || num_jobs < 1 || ops_per_job < 1) throw ConfigError("instance counts must be >= 1");
  Rng rng(derive_seed(seed, Stream::Instance));
  std::vector<MachineId> machines(static_cast<std::size_t>(num_machines));
  std::iota(machines.begin(), machines.end(), 0);
  std::vector<std::vector<Operation>> jobs(static_cast<std::size_t>(num_jobs));
  for (auto& job : jobs) {
    for (int k = 0; k < ops_per_job; ++k) {
      Operation op;
      auto size = static_cast<std::size_t>(rng.uniform_int(1, num_machines));
      // Partial Fisher-Yates: the first `size` entries form a uniform subset.
      for (std::size_t i = 0; i < size; ++i) {
        auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i), num_machines - 1));
        std::swap(machines[i], machines[j]);
      }
      std::vector<MachineId> subset(machines.begin(), machines.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(subset.begin(), subset.end());
      for (MachineId m : subset) op.compatible.push_back({m, rng.uniform_int(1, 99)});
      job.push_back(std::move(op));
    }
  }
  return FjspInstance(num_machines, std::move(jobs), ObjectiveKind::Makespan, seed);
}

FjspInstance gen_delay_instance(std::uint64_t seed, int num_machines, int num_jobs, int ops_per_job,
                                ObjectiveKind objective) {
  if (num_machines < 1 || num_jobs < 1 || ops_per_job < 1) throw ConfigError("instance counts must be >= 1");
  Rng rng(derive_seed(seed, Stream::Instance));
  static constexpr Time kLow[] = {3, 5, 7, 9};
  static constexpr Time kSpan[] = {9, 12, 15, 18, 21};
  const Time l_low = kLow[rng.uniform_int(0, 3)];
  const Time l_high = l_low + kSpan[rng.uniform_int(0, 4)];
  std::vector<std::vector<Operation>> jobs(static_cast<std::size_t>(num_jobs));
  for (auto& job : jobs) {
    Time release = 0;
    for (int k = 0; k < ops_per_job; ++k) {
      Operation op;
      for (MachineId m = 0; m < num_machines; ++m) op.compatible.push_back({m, rng.uniform_int(l_low, l_high)});
      release += rng.uniform_int(0, 15);
      op.release_time = release;
      op.target_end_time = release + rng.uniform_int(0, 30);
      job.push_back(std::move(op));
    }
  }
  return FjspInstance(num_machines, std::move(jobs), objective, seed);
}

BreakdownIntensity BreakdownIntensity::from_name(std::string_view name) {
  if (name == "low") return low();
  if (name == "mid") return mid();
  if (name == "high") return high();
  throw ConfigError("unknown breakdown intensity '" + std::string(name) + "'");
}

std::set<MachineId> BreakdownSchedule::down_at(Time t) const {
  std::set<MachineId> out;
  for (const auto& e : events)
    if (e.start <= t && t < e.end()) out.insert(e.down_machines.begin(), e.down_machines.end());
  return out;
}

std::optional<Time> BreakdownSchedule::next_change_after(Time t) const {
  std::optional<Time> best;
  for (const auto& e : events) {
    if (e.down_machines.empty()) continue;
    for (Time x : {e.start, e.end()})
      if (x > t && (!best || x < *best)) best = x;
  }
  return best;
}

bool BreakdownSchedule::is_down_during(MachineId m, Time from, Time to) const {
  for (const auto& e : events)
    if (e.down_machines.count(m) && e.start < to && from < e.end()) return true;
  return false;
}

BreakdownSchedule gen_breakdowns(std::uint64_t seed, const BreakdownIntensity& intensity, Time horizon,
                                 int num_machines) {
  if (horizon <= 0) throw ConfigError("breakdown horizon must be positive");
  if (intensity.p_b < 0.0 || intensity.p_b > 1.0) throw ConfigError("p_b must lie in [0,1]");
  Rng rng(derive_seed(seed, Stream::Breakdown));
  BreakdownSchedule schedule;
  Time t = rng.uniform_int(50, 150);
  while (t <= horizon) {
    BreakdownEvent e;
    e.start = t;
    e.duration = intensity.dur;
    for (MachineId m = 0; m < num_machines; ++m)
      if (rng.bernoulli(intensity.p_b)) e.down_machines.insert(m);
    schedule.events.push_back(std::move(e));
    t += intensity.dur + rng.uniform_int(intensity.w_lb, intensity.w_ub);
  }
  return schedule;
}

DurationOverlay observe_durations(const FjspInstance& inst, std::span<const OpId> plan_ops, int clean_count,
                                  std::uint64_t seed, const NoiseModel& noise) {
  if (noise.epsilon < 0.0 || noise.epsilon > 1.0) throw ConfigError("noise epsilon must lie in [0,1]");
  Rng rng(seed);
  DurationOverlay overlay;
  for (std::size_t i = 0; i < plan_ops.size(); ++i) {
    const Operation& op = inst.op(plan_ops[i]);
    std::vector<Time> observed;
    observed.reserve(op.compatible.size());
    for (const auto& md : op.compatible) observed.push_back(md.duration);
    if (static_cast<int>(i) >= clean_count && rng.bernoulli(noise.epsilon)) {
      for (Time& d : observed)
        d = std::clamp(d + rng.uniform_int(noise.perturb_lo, noise.perturb_hi), noise.clip_lo, noise.clip_hi);
    }
    overlay.emplace(plan_ops[i], std::move(observed));
  }
  return overlay;
}

}  // namespace lrho
