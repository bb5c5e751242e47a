#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrho/analysis.hpp"

using namespace lrho;

namespace {

// Expected errors by summing over positions directly.
std::pair<double, double> summed(const FixMethod& method, const LinearDecay& d) {
  double fp = 0, fn = 0;
  for (int i = 1; i <= d.W; ++i) {
    double p = d.pfix(i);
    if (auto* r = std::get_if<RandomFix>(&method)) {
      fp += r->sigma * (1 - p);
      fn += (1 - r->sigma) * p;
    } else if (auto* f = std::get_if<FirstFix>(&method)) {
      bool sel = i <= static_cast<int>(std::floor(f->sigma * d.W + 1e-9));
      fp += sel ? 1 - p : 0;
      fn += sel ? 0 : p;
    } else {
      const auto& l = std::get<LearnedFix>(method);
      fp += l.alpha * (1 - p);
      fn += l.beta * p;
    }
  }
  return {fp, fn};
}

StateRecord labelled(int instance, int iteration, std::vector<int> y) {
  StateRecord r;
  r.variant = FeatureVariant::StartDelay;
  r.instance = instance;
  r.iteration = iteration;
  auto [d_o, d_m] = feature_dims(r.variant);
  r.op_features = Matrix(static_cast<int>(y.size()), d_o);
  r.machine_features = Matrix(1, d_m);
  r.overlap_mask.assign(y.size(), 1);
  r.prev_machine_index.assign(y.size(), 0);
  r.labels = y;
  return r;
}

}  // namespace

TEST_CASE("closed-form spot values") {
  LinearDecay d{0.7, 0.4, 10};
  double E = 0;
  for (int i = 1; i <= 10; ++i) E += d.pfix(i);
  CHECK(std::abs(d.expected_nfix() - 4.8) < 1e-12);
  CHECK(std::abs(E - 4.8) < 1e-12);
  struct Spot {
    FixMethod m;
    double fp, fn;
  };
  for (const Spot& s : {Spot{RandomFix{0.5}, 2.6, 2.4}, Spot{FirstFix{0.5}, 2.1, 1.9}, Spot{LearnedFix{0.1, 0.2}, 0.52, 0.96}}) {
    ErrorPair e = closed_form_errors(s.m, d);
    auto [fp, fn] = summed(s.m, d);
    CHECK(std::abs(e.expected_fp - s.fp) < 1e-12);
    CHECK(std::abs(e.expected_fn - s.fn) < 1e-12);
    CHECK(std::abs(fp - s.fp) < 1e-12);
    CHECK(std::abs(fn - s.fn) < 1e-12);
  }
}

TEST_CASE("rates") {
  LinearDecay d{0.7, 0.4, 50};
  MethodRates r = first_random_rates(d, 0.5);
  CHECK(r.random.alpha == 0.5);
  CHECK(r.random.beta == 0.5);
  CHECK(std::abs(r.first.alpha - 0.4) < 1e-12);
  CHECK(std::abs(r.first.beta - 0.4) < 1e-12);
  MethodRates flat = first_random_rates(LinearDecay{0.6, 0.0, 50}, 0.3);
  CHECK(std::abs(flat.first.alpha - flat.random.alpha) < 1e-12);
  CHECK(std::abs(flat.first.beta - flat.random.beta) < 1e-12);
  CHECK_THROWS_AS(first_random_rates(LinearDecay{1.0, 0.0, 10}, 0.5), UndefinedMetricError);
  for (double s : {0.1, 0.3, 0.7}) {
    ErrorPair e = closed_form_errors(RandomFix{s}, d);
    CHECK(std::abs(*e.fpr - s) < 1e-12);
    CHECK(std::abs(*e.fnr - (1 - s)) < 1e-12);
  }
  CHECK_THROWS_AS(closed_form_errors(RandomFix{0.5}, LinearDecay{0.5, 0.9, 10}), ConfigError);
}

TEST_CASE("closed forms agree with direct summation over a grid") {
  for (double b : {0.4, 0.6, 0.8, 1.0})
    for (double m : {0.0, 0.2, 0.4, 0.6})
      for (int W : {10, 20, 50}) {
        LinearDecay d{b, m, W};
        if (!d.valid()) continue;
        for (double s : {0.1, 0.2, 0.5, 0.8}) {
          for (FixMethod f : {FixMethod{RandomFix{s}}, FixMethod{FirstFix{s}}, FixMethod{LearnedFix{s / 2, s / 3}}}) {
            ErrorPair e = closed_form_errors(f, d);
            auto [fp, fn] = summed(f, d);
            CHECK(std::abs(e.expected_fp - fp) < 1e-9);
            CHECK(std::abs(e.expected_fn - fn) < 1e-9);
            CHECK(e.expected_fp <= W - d.expected_nfix() + 1e-9);
            CHECK(e.expected_fn <= d.expected_nfix() + 1e-9);
            if (e.fpr && e.fnr) {
              auto [fp2, fn2] = rates_to_errors(*e.fpr, *e.fnr, d);
              CHECK(std::abs(fp2 - e.expected_fp) < 1e-9);
              CHECK(std::abs(fn2 - e.expected_fn) < 1e-9);
            }
          }
          if (m > 0) {
            ErrorPair first = closed_form_errors(FirstFix{s}, d), random = closed_form_errors(RandomFix{s}, d);
            CHECK(first.expected_fp <= random.expected_fp + 1e-12);
            CHECK(first.expected_fn <= random.expected_fn + 1e-12);
          }
        }
      }
}

TEST_CASE("monte carlo agrees with the closed form") {
  LinearDecay d{0.7, 0.4, 50};
  std::vector<double> p;
  for (int i = 1; i <= 50; ++i) p.push_back(d.pfix(i));
  for (FixMethod f : {FixMethod{RandomFix{0.5}}, FixMethod{FirstFix{0.5}}, FixMethod{LearnedFix{0.1, 0.2}}}) {
    ErrorPair e = closed_form_errors(f, d);
    McEstimate mc = monte_carlo_errors(f, p, 100000, 11, 4);
    CHECK(std::abs(mc.fp - e.expected_fp) <= 3 * mc.fp_se + 1e-12);
    CHECK(std::abs(mc.fn - e.expected_fn) <= 3 * mc.fn_se + 1e-12);
    CHECK(mc.fp == monte_carlo_errors(f, p, 100000, 11, 1).fp);
  }
  std::vector<double> zeros(20, 0.0), ones(20, 1.0);
  CHECK(monte_carlo_errors(RandomFix{0.4}, zeros, 1000, 1).fn == 0.0);
  McEstimate all = monte_carlo_errors(FirstFix{1.0}, ones, 1000, 1);
  CHECK(all.fp == 0.0);
  CHECK(all.fn == 0.0);
}

TEST_CASE("empirical fix probabilities") {
  std::vector<StateRecord> two{labelled(0, 2, {1, 0}), labelled(1, 2, {1, 1})};
  PfixEstimate e = empirical_pfix(two);
  CHECK(e.W == 2);
  CHECK(e.p == std::vector<double>{1.0, 0.5});

  std::vector<StateRecord> ones{labelled(0, 2, {1, 1, 1}), labelled(0, 3, {1, 1, 1}), labelled(1, 2, {1, 1, 1})};
  PfixEstimate o = empirical_pfix(ones);
  CHECK(o.p == std::vector<double>{1, 1, 1});
  CHECK(o.stderr_ == std::vector<double>{0, 0, 0});

  // Labels sampled from a known decay land within binomial bands of the truth.
  LinearDecay truth{0.9, 0.6, 10};
  Rng rng(3);
  std::vector<StateRecord> sampled;
  const int iterations = 8, instances = 100;
  for (int it = 2; it < 2 + iterations; ++it)
    for (int n = 0; n < instances; ++n) {
      std::vector<int> y;
      for (int i = 1; i <= 10; ++i) y.push_back(rng.bernoulli(truth.pfix(i)));
      sampled.push_back(labelled(n, it, y));
    }
  PfixEstimate s = empirical_pfix(sampled);
  const double total = iterations * instances;
  for (int i = 1; i <= 10; ++i) {
    double p = truth.pfix(i);
    CHECK(std::abs(s.p[i - 1] - p) <= 4 * std::sqrt(p * (1 - p) / total) + 1e-12);
  }
  LinearFit fit = fit_linear_decay(s.p);
  CHECK(std::abs(fit.raw.b - 0.9) < 0.05);
  CHECK(std::abs(fit.raw.m - 0.6) < 0.08);
  CHECK(*fit.p_value < 0.05);
  CHECK_THROWS_AS(empirical_pfix({}), InsufficientDataError);
}

TEST_CASE("least-squares decay fit") {
  std::vector<double> p{0.9, 0.7, 0.5, 0.3};
  LinearFit f = fit_linear_decay(p);
  CHECK(std::abs(f.raw.b - 1.1) < 1e-12);
  CHECK(std::abs(f.raw.m - 0.8) < 1e-12);
  CHECK(f.clamped.b == 1.0);
  for (int i = 1; i <= 4; ++i) CHECK(std::abs(f.raw.pfix(i) - p[i - 1]) < 1e-9);
  CHECK(*f.p_value < 1e-12);

  std::vector<double> flat(6, 0.4);
  LinearFit c = fit_linear_decay(flat);
  CHECK(std::abs(c.raw.m) < 1e-12);
  CHECK(std::abs(c.raw.b - 0.4) < 1e-12);
  CHECK(!fit_linear_decay(std::vector<double>{0.5, 0.4}).p_value);
}

TEST_CASE("confusion counts") {
  Confusion c = confusion({1, 2}, {2, 3}, {1, 2, 3, 4});
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  Confusion same = confusion({1, 2}, {1, 2}, {1, 2, 3});
  CHECK(same.fp == 0);
  CHECK(same.fn == 0);
  CHECK(same.accuracy == 1.0);
  CHECK(*confusion({}, {1}, {1, 2}).beta == 1.0);
}
