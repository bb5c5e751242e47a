#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "lrho/learn.hpp"
#include "lrho/rng.hpp"

namespace lrho {

int default_workers() {
  if (const char* env = std::getenv("LRHO_WORKERS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("LRHO_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = default_workers();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < k; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t instance_run_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, {static_cast<std::uint64_t>(i)}); }

std::vector<StateRecord> collect_labels(const std::vector<FjspInstance>& instances, const RhoParams& params, int Q,
                                        std::uint64_t seed, const CollectOptions& options) {
  if (Q < 1) throw ConfigError("collection needs Q >= 1");
  for (const auto& inst : instances) check_variant(options.variant, inst.objective());
  std::vector<std::vector<StateRecord>> per(instances.size());
  parallel_for(instances.size(), options.workers, [&](std::size_t i) {
    RhoOptions opt;
    opt.include_oracle_time = true;
    opt.observer = [&, i](const RhoState& state, const FixDecision& d) {
      StateRecord rec = extract_features(state, options.variant);
      rec.instance = static_cast<int>(i);
      rec.labels = d.labels;
      per[i].push_back(std::move(rec));
    };
    const std::uint64_t run_seed = instance_run_seed(seed, i);
    std::optional<BreakdownSchedule> own;
    if (options.make_events) own = options.make_events(i, run_seed);
    const BreakdownSchedule* events = options.make_events ? (own ? &*own : nullptr) : options.events;
    run_rho(instances[i], params, FixStrategy::oracle(Q), events, options.noise, run_seed, opt);
  });
  std::vector<StateRecord> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

}  // namespace lrho
