#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace lrho {

// Stream purposes for derive_seed; appending new purposes never shifts existing draws.
enum class Stream : std::uint64_t {
  Instance = 1,
  Breakdown = 2,
  Noise = 3,
  Solve = 4,
  OracleSolve = 5,
  RandomFix = 6,
  Training = 7,
  MonteCarlo = 8,
  ShadowOracle = 9,
};

// SplitMix64 finalizer chained over the tags.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);
inline std::uint64_t derive_seed(std::uint64_t base, Stream s, std::initializer_list<std::uint64_t> tags = {}) {
  std::uint64_t seed = derive_seed(base, {static_cast<std::uint64_t>(s)});
  return tags.size() ? derive_seed(seed, tags) : seed;
}

// Portable generator: mt19937_64 is bit-specified by the standard; the distributions
// below are implemented here because std:: distributions differ between libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Inclusive on both ends.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lrho
