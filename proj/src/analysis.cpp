#include "lrho/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/distributions/students_t.hpp>

#include "lrho/learn.hpp"
#include "lrho/rng.hpp"

namespace lrho {

bool LinearDecay::valid() const {
  if (W < 1) return false;
  for (int i = 1; i <= W; ++i)
    if (pfix(i) < -1e-12 || pfix(i) > 1 + 1e-12) return false;
  return true;
}

void LinearDecay::validate() const {
  if (!valid()) throw ConfigError("linear decay leaves [0, 1] on 1..W");
}

ErrorPair with_rates(double fp, double fn, const LinearDecay& decay) {
  ErrorPair e;
  e.expected_fp = fp;
  e.expected_fn = fn;
  const double E = decay.expected_nfix();
  if (decay.W - E > 0) e.fpr = fp / (decay.W - E);
  if (E > 0) e.fnr = fn / E;
  return e;
}

std::pair<double, double> rates_to_errors(double alpha, double beta, const LinearDecay& decay) {
  const double E = decay.expected_nfix();
  return {alpha * (decay.W - E), beta * E};
}

ErrorPair closed_form_errors(const FixMethod& method, const LinearDecay& decay) {
  decay.validate();
  const double W = decay.W, b = decay.b, m = decay.m;
  const double E = decay.expected_nfix();
  double fp = 0, fn = 0;
  if (auto* r = std::get_if<RandomFix>(&method)) {
    const double s = r->sigma;
    fp = s * ((1 - b + m / 2) * W + m / 2);
    fn = (1 - s) * ((b - m / 2) * W - m / 2);
  } else if (auto* f = std::get_if<FirstFix>(&method)) {
    const double s = f->sigma;
    fp = s * ((1 - b + m / 2 * s) * W + m / 2);
    fn = (1 - s) * ((b - m / 2 - m / 2 * s) * W - m / 2);
  } else {
    const auto& l = std::get<LearnedFix>(method);
    fp = l.alpha * (W - E);
    fn = l.beta * E;
  }
  return with_rates(fp, fn, decay);
}

MethodRates first_random_rates(const LinearDecay& decay, double sigma) {
  const double b = decay.b, m = decay.m;
  const double neg = 1 - b + m / 2, pos = b - m / 2;
  if (!(pos > 0) || !(neg > 0)) throw UndefinedMetricError("rates need 0 < b - m/2 < 1");
  MethodRates r;
  r.random = {sigma, 1 - sigma};
  r.first = {sigma * (1 - b + m / 2 * sigma) / neg, 1 - sigma * (b - m / 2 * sigma) / pos};
  return r;
}

McEstimate monte_carlo_errors(const FixMethod& method, std::span<const double> pfix, std::int64_t trials,
                              std::uint64_t seed, int workers) {
  if (trials < 1) throw ConfigError("monte carlo needs at least one trial");
  const int W = static_cast<int>(pfix.size());
  constexpr std::size_t kChunks = 64;
  struct Acc {
    double fp = 0, fn = 0, fp2 = 0, fn2 = 0;
  };
  std::vector<Acc> acc(kChunks);
  std::int64_t first_k = 0;
  if (auto* f = std::get_if<FirstFix>(&method)) first_k = static_cast<std::int64_t>(std::floor(f->sigma * W + 1e-9));

  parallel_for(kChunks, workers, [&](std::size_t c) {
    std::int64_t lo = trials * static_cast<std::int64_t>(c) / static_cast<std::int64_t>(kChunks);
    std::int64_t hi = trials * static_cast<std::int64_t>(c + 1) / static_cast<std::int64_t>(kChunks);
    Rng rng(derive_seed(seed, Stream::MonteCarlo, {c}));
    Acc a;
    for (std::int64_t t = lo; t < hi; ++t) {
      int fp = 0, fn = 0;
      for (int i = 0; i < W; ++i) {
        bool y = rng.bernoulli(pfix[static_cast<std::size_t>(i)]);
        bool sel = false;
        if (auto* r = std::get_if<RandomFix>(&method)) sel = rng.bernoulli(r->sigma);
        else if (std::holds_alternative<FirstFix>(method)) sel = i < first_k;
        else {
          const auto& l = std::get<LearnedFix>(method);
          sel = y ? !rng.bernoulli(l.beta) : rng.bernoulli(l.alpha);
        }
        fp += sel && !y;
        fn += !sel && y;
      }
      a.fp += fp;
      a.fn += fn;
      a.fp2 += static_cast<double>(fp) * fp;
      a.fn2 += static_cast<double>(fn) * fn;
    }
    acc[c] = a;
  });
  Acc total;
  for (const auto& a : acc) {
    total.fp += a.fp;
    total.fn += a.fn;
    total.fp2 += a.fp2;
    total.fn2 += a.fn2;
  }
  const double n = static_cast<double>(trials);
  McEstimate e;
  e.trials = trials;
  e.fp = total.fp / n;
  e.fn = total.fn / n;
  auto se = [&](double sum2, double mean) {
    double var = std::max(sum2 / n - mean * mean, 0.0);
    return std::sqrt(var / n);
  };
  e.fp_se = se(total.fp2, e.fp);
  e.fn_se = se(total.fn2, e.fn);
  return e;
}

PfixEstimate empirical_pfix(const std::vector<StateRecord>& dataset, std::optional<int> W) {
  std::vector<const StateRecord*> labeled;
  for (const auto& r : dataset)
    if (r.labels && r.num_overlap() > 0) labeled.push_back(&r);
  if (labeled.empty()) throw InsufficientDataError("no labeled records with overlap operations");
  if (!W) {
    std::map<int, int> freq;
    for (auto* r : labeled) ++freq[r->num_overlap()];
    W = std::max_element(freq.begin(), freq.end(), [](const auto& a, const auto& b) {
          return a.second < b.second || (a.second == b.second && a.first < b.first);
        })->first;
  }
  // iteration -> per-position sums over instances
  std::map<int, std::pair<std::vector<double>, int>> by_iter;
  PfixEstimate est;
  est.W = *W;
  for (auto* r : labeled) {
    if (r->num_overlap() != *W) continue;
    auto& [sum, count] = by_iter[r->iteration];
    sum.resize(static_cast<std::size_t>(*W), 0.0);
    for (int i = 0; i < *W; ++i) sum[static_cast<std::size_t>(i)] += (*r->labels)[static_cast<std::size_t>(i)];
    ++count;
    ++est.records_used;
  }
  if (by_iter.empty()) throw InsufficientDataError("no records with overlap size " + std::to_string(*W));
  est.iterations = static_cast<int>(by_iter.size());
  est.p.assign(static_cast<std::size_t>(*W), 0.0);
  est.stderr_.assign(static_cast<std::size_t>(*W), 0.0);
  const double n_iter = est.iterations;
  for (int i = 0; i < *W; ++i) {
    std::vector<double> per;
    for (const auto& [iter, sc] : by_iter) per.push_back(sc.first[static_cast<std::size_t>(i)] / sc.second);
    double mean = 0;
    for (double v : per) mean += v;
    mean /= n_iter;
    double var = 0;
    for (double v : per) var += (v - mean) * (v - mean);
    est.p[static_cast<std::size_t>(i)] = mean;
    est.stderr_[static_cast<std::size_t>(i)] = std::sqrt(var / n_iter) / std::sqrt(n_iter);
  }
  return est;
}

LinearFit fit_linear_decay(std::span<const double> p) {
  const int W = static_cast<int>(p.size());
  if (W < 2) throw InsufficientDataError("fitting needs at least two points");
  double sx = 0, sy = 0;
  for (int i = 1; i <= W; ++i) {
    sx += static_cast<double>(i) / W;
    sy += p[static_cast<std::size_t>(i - 1)];
  }
  const double mx = sx / W, my = sy / W;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 1; i <= W; ++i) {
    double dx = static_cast<double>(i) / W - mx, dy = p[static_cast<std::size_t>(i - 1)] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  LinearFit fit;
  fit.raw = {intercept, -slope, W};
  fit.clamped = {std::clamp(intercept, 0.0, 1.0), std::clamp(-slope, 0.0, 1.0), W};
  double sse = 0;
  for (int i = 1; i <= W; ++i) {
    double r = p[static_cast<std::size_t>(i - 1)] - (intercept + slope * i / W);
    sse += r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - sse / syy : 1.0;
  if (W >= 3) {
    const double dof = W - 2;
    fit.slope_stderr = std::sqrt(sse / dof / sxx);
    if (fit.slope_stderr > 0) {
      fit.t_stat = slope / fit.slope_stderr;
      boost::math::students_t dist(dof);
      fit.p_value = boost::math::cdf(dist, fit.t_stat);
    } else {
      fit.t_stat = slope < 0 ? -std::numeric_limits<double>::infinity()
                             : (slope > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      fit.p_value = slope < 0 ? 0.0 : (slope > 0 ? 1.0 : 0.5);
    }
  }
  return fit;
}

Confusion confusion(const std::set<OpId>& predicted, const std::set<OpId>& oracle, const std::set<OpId>& overlap) {
  Confusion c;
  for (OpId op : overlap) {
    bool p = predicted.count(op), o = oracle.count(op);
    if (p && o) ++c.tp;
    else if (p) ++c.fp;
    else if (o) ++c.fn;
    else ++c.tn;
  }
  const int n = static_cast<int>(overlap.size());
  c.accuracy = n ? static_cast<double>(c.tp + c.tn) / n : 1.0;
  if (c.tp + c.fp) c.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
  if (c.tp + c.fn) c.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
  const int negatives = n - static_cast<int>(oracle.size());
  if (negatives > 0) c.alpha = static_cast<double>(c.fp) / negatives;
  if (!oracle.empty()) c.beta = static_cast<double>(c.fn) / static_cast<double>(oracle.size());
  return c;
}

}  // namespace lrho
