#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include "lrho/core.hpp"
#include "lrho/features.hpp"

namespace lrho {

// p_fix(i) = b - m*i/W for i in 1..W.
struct LinearDecay {
  double b = 1.0;
  double m = 0.0;
  int W = 1;

  double pfix(int i) const { return b - m * i / W; }
  double expected_nfix() const { return (b - m / 2) * W - m / 2; }
  bool valid() const;
  void validate() const;
};

struct ErrorPair {
  double expected_fp = 0.0;
  double expected_fn = 0.0;
  std::optional<double> fpr;  // alpha
  std::optional<double> fnr;  // beta
};

struct RandomFix {
  double sigma = 0.0;
};
struct FirstFix {
  double sigma = 0.0;
};
struct LearnedFix {
  double alpha = 0.0;
  double beta = 0.0;
};
using FixMethod = std::variant<RandomFix, FirstFix, LearnedFix>;

// Exact expected errors under the linear decay (retaining the m/2 tail terms).
ErrorPair closed_form_errors(const FixMethod& method, const LinearDecay& decay);
ErrorPair with_rates(double fp, double fn, const LinearDecay& decay);
// Inverse of with_rates: errors implied by (alpha, beta).
std::pair<double, double> rates_to_errors(double alpha, double beta, const LinearDecay& decay);

struct Rates {
  double alpha = 0.0;
  double beta = 0.0;
};
struct MethodRates {
  Rates random;
  Rates first;
};
// Simplified rates that drop the m/2 term of E[n_fix]. Throws UndefinedMetricError on degenerate denominators.
MethodRates first_random_rates(const LinearDecay& decay, double sigma);

struct McEstimate {
  double fp = 0.0;
  double fn = 0.0;
  double fp_se = 0.0;
  double fn_se = 0.0;
  std::int64_t trials = 0;
};

// First selects the first floor(sigma*W) positions.
McEstimate monte_carlo_errors(const FixMethod& method, std::span<const double> pfix, std::int64_t trials,
                              std::uint64_t seed, int workers = 1);

struct PfixEstimate {
  int W = 0;
  std::vector<double> p;       // index i-1
  std::vector<double> stderr_;  // population std across iterations / sqrt(iterations)
  int iterations = 0;
  int records_used = 0;
};

// Two-stage average: per-iteration mean over instances, then mean across iterations.
// Uses records whose overlap size equals W (default: the most common overlap size).
PfixEstimate empirical_pfix(const std::vector<StateRecord>& dataset, std::optional<int> W = std::nullopt);

struct LinearFit {
  LinearDecay raw;
  LinearDecay clamped;
  double slope_stderr = 0.0;
  double t_stat = 0.0;
  // One-sided p-value for slope < 0 (i.e. m > 0); absent when W < 3.
  std::optional<double> p_value;
  double r_squared = 0.0;
};

// Least squares of p(i) on i/W.
LinearFit fit_linear_decay(std::span<const double> p);

struct Confusion {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> alpha;
  std::optional<double> beta;
};

Confusion confusion(const std::set<OpId>& predicted, const std::set<OpId>& oracle, const std::set<OpId>& overlap);

}  // namespace lrho
