#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "ranking.hpp"

namespace optistat {

struct PairwiseReport {
  std::string test;
  std::vector<std::pair<std::string, double>> statistics;
  std::optional<double> p_exact;
  std::optional<double> p_asymptotic;
  double alpha = 0.05;
  bool rejected = false;
  bool degenerate = false;

  /// Exact p when available, otherwise the asymptotic one.
  double p_value() const { return p_exact ? *p_exact : p_asymptotic.value_or(1.0); }

  double statistic(const std::string& name) const {
    for (const auto& [k, v] : statistics)
      if (k == name) return v;
    throw UnknownIdError("no statistic '" + name + "' in " + test);
  }

  void decide() { rejected = p_value() < alpha; }
};

namespace detail {

inline void require_paired(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("paired samples must have equal length");
  if (x.empty()) throw EmptyInputError("paired samples are empty");
}

// Distribution of sum_i s_i r_i over independent fair signs s_i in {0, 1} for
// non-negative integer weights r_i. counts[v] / 2^len is P(sum = v).
inline std::vector<double> subset_sum_counts(const std::vector<long>& weights) {
  long total = 0;
  for (long w : weights) total += w;
  std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
  counts[0] = 1.0;
  long reach = 0;
  for (long w : weights) {
    for (long v = reach; v >= 0; --v)
      if (counts[v] != 0.0) counts[v + w] += counts[v];
    reach += w;
  }
  return counts;
}

}  // namespace detail

/// Sign test. K counts x > y (the second sample wins under minimisation), K2
/// counts x < y; ties are dropped.
inline PairwiseReport sign_test(const std::vector<double>& x, const std::vector<double>& y,
                                double alpha = 0.05) {
  detail::require_paired(x, y);
  long long k = 0, k2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > y[i]) ++k;
    if (x[i] < y[i]) ++k2;
  }
  PairwiseReport r{"sign", {{"K", double(k)}, {"K2", double(k2)}, {"ties", double(x.size() - k - k2)}},
                   std::nullopt, std::nullopt, alpha};
  if (k + k2 == 0) {
    r.p_exact = 1.0;
    r.degenerate = true;
  } else {
    r.p_exact = dist::clamp01(2.0 * dist::binom_half_cdf(std::min(k, k2), k + k2));
  }
  r.decide();
  return r;
}

/// Wilcoxon signed-rank test on d = x - y. Zero differences keep their
/// midranks and split them evenly between R+ and R-.
inline PairwiseReport wilcoxon_signed_rank(const std::vector<double>& x,
                                           const std::vector<double>& y, double alpha = 0.05,
                                           std::size_t exact_limit = 30) {
  detail::require_paired(x, y);
  std::size_t n = x.size();
  std::vector<double> d(n), ad(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = x[i] - y[i];
    ad[i] = std::fabs(d[i]);
  }
  auto rk = rank_with_ties(ad);
  double rplus = 0, rminus = 0, zero_mass = 0;
  std::size_t nonzero = 0;
  std::vector<long> doubled;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) rplus += rk[i];
    else if (d[i] < 0) rminus += rk[i];
    else zero_mass += rk[i];
    if (d[i] != 0) {
      ++nonzero;
      doubled.push_back(std::lround(2.0 * rk[i]));
    }
  }
  rplus += zero_mass / 2;
  rminus += zero_mass / 2;

  PairwiseReport r{"wilcoxon_signed_rank",
                   {{"R+", rplus}, {"R-", rminus}, {"n", double(n)}, {"nonzero", double(nonzero)}},
                   std::nullopt, std::nullopt, alpha};
  if (nonzero == 0) {
    r.p_exact = 1.0;
    r.p_asymptotic = 1.0;
    r.degenerate = true;
    r.decide();
    return r;
  }

  double nn = static_cast<double>(nonzero);
  double mu = nn * (nn + 1) / 4;
  double sd = std::sqrt(nn * (nn + 1) * (2 * nn + 1) / 24);
  double z = std::max(0.0, std::fabs(rplus - mu) - 0.5) / sd;
  r.p_asymptotic = dist::normal_two_sided(z);

  if (n <= exact_limit) {
    auto counts = detail::subset_sum_counts(doubled);
    double total = std::ldexp(1.0, static_cast<int>(nonzero));
    // Doubled statistic of the non-zero part: 2R+ - zero_mass.
    long obs = std::lround(2.0 * rplus - zero_mass);
    double lower = 0, upper = 0;
    for (std::size_t v = 0; v < counts.size(); ++v) {
      if (static_cast<long>(v) <= obs) lower += counts[v];
      if (static_cast<long>(v) >= obs) upper += counts[v];
    }
    r.p_exact = dist::clamp01(2.0 * std::min(lower, upper) / total);
  }
  r.decide();
  return r;
}

/// Wilcoxon rank-sum (Mann-Whitney) test; W is the rank sum of x.
inline PairwiseReport wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y,
                                        double alpha = 0.05, std::size_t exact_limit = 20) {
  if (x.empty() || y.empty()) throw EmptyInputError("rank-sum samples must be non-empty");
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  auto rk = rank_with_ties(pooled);
  std::size_t n1 = x.size(), n2 = y.size(), N = n1 + n2;
  double W = 0;
  for (std::size_t i = 0; i < n1; ++i) W += rk[i];

  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0;
  for (std::size_t i = 0; i < N;) {
    std::size_t j = i;
    while (j + 1 < N && sorted[j + 1] == sorted[i]) ++j;
    double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  double a = static_cast<double>(n1), b = static_cast<double>(n2), NN = static_cast<double>(N);
  double mu = a * (NN + 1) / 2;
  double var = a * b / 12.0 * ((NN + 1) - tie_term / (NN * (NN - 1)));

  PairwiseReport r{"wilcoxon_rank_sum", {{"W", W}, {"n1", a}, {"n2", b}}, std::nullopt,
                   std::nullopt, alpha};
  if (var <= 0) {
    r.p_asymptotic = 1.0;
    r.degenerate = true;
  } else {
    r.p_asymptotic = dist::normal_two_sided(std::max(0.0, std::fabs(W - mu) - 0.5) / std::sqrt(var));
  }

  if (N <= exact_limit) {
    // counts[c][s]: subsets of size c with doubled rank sum s.
    std::vector<long> dr(N);
    long total = 0;
    for (std::size_t i = 0; i < N; ++i) total += dr[i] = std::lround(2 * rk[i]);
    std::vector<std::vector<double>> counts(n1 + 1, std::vector<double>(total + 1, 0.0));
    counts[0][0] = 1;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t c = std::min(i + 1, n1); c >= 1; --c)
        for (long s = total - dr[i]; s >= 0; --s)
          if (counts[c - 1][s] != 0) counts[c][s + dr[i]] += counts[c - 1][s];
    long obs = std::lround(2 * W);
    double lower = 0, upper = 0, all = 0;
    for (long s = 0; s <= total; ++s) {
      all += counts[n1][s];
      if (s <= obs) lower += counts[n1][s];
      if (s >= obs) upper += counts[n1][s];
    }
    r.p_exact = dist::clamp01(2.0 * std::min(lower, upper) / all);
  }
  r.decide();
  return r;
}

inline PairwiseReport t_test_paired(const std::vector<double>& x, const std::vector<double>& y,
                                    double alpha = 0.05) {
  detail::require_paired(x, y);
  std::size_t n = x.size();
  if (n < 2) throw SizeError("paired t-test needs at least 2 pairs");
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  double var = ss / static_cast<double>(n - 1);
  if (var <= 0) throw DegenerateError("paired differences have zero variance");
  double t = mean / std::sqrt(var / static_cast<double>(n));
  double df = static_cast<double>(n - 1);
  PairwiseReport r{"t_paired", {{"t", t}, {"df", df}}, std::nullopt, std::nullopt, alpha};
  r.p_asymptotic = dist::t_two_sided(t, df);
  r.decide();
  return r;
}

namespace detail {

inline std::vector<double> all_differences(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  d.reserve(x.size() * y.size());
  for (double a : x)
    for (double b : y) d.push_back(a - b);
  std::sort(d.begin(), d.end());
  return d;
}

inline std::pair<double, double> interval_from_sorted(const std::vector<double>& d, std::size_t l,
                                                      double alpha) {
  double l2 = static_cast<double>(l * l);
  double z = dist::normal_quantile(1 - alpha / 2);
  double K = std::round(l2 / 2 - z * std::sqrt(l2 * (2.0 * l + 1) / 12.0));
  K = std::clamp(K, 1.0, std::floor(l2 / 2));
  auto k = static_cast<std::size_t>(K);
  return {d[k - 1], d[d.size() - k]};
}

}  // namespace detail

/// Interval from the K-th smallest to the K-th largest of the l^2 differences.
inline std::pair<double, double> np_confidence_interval(const std::vector<double>& x,
                                                        const std::vector<double>& y, double alpha) {
  if (x.size() != y.size()) throw ShapeError("samples must have equal length");
  if (x.size() < 2) throw SizeError("confidence interval needs l >= 2");
  if (!(alpha > 0 && alpha < 1)) throw ValueError("alpha must lie in (0, 1)");
  return detail::interval_from_sorted(detail::all_differences(x, y), x.size(), alpha);
}

struct ConfidenceLevel {
  double alpha, lower, upper;
};

struct ConfidenceCurve {
  double point_estimate = 0;
  std::vector<ConfidenceLevel> levels;
};

/// Intervals on a uniform alpha grid over (0.001, 0.999) plus 0.01, 0.05, 0.10.
inline ConfidenceCurve confidence_curve(const std::vector<double>& x, const std::vector<double>& y,
                                        std::size_t grid_size = 99) {
  if (grid_size < 10) throw SizeError("confidence curve grid needs at least 10 points");
  if (x.size() != y.size()) throw ShapeError("samples must have equal length");
  if (x.size() < 2) throw SizeError("confidence interval needs l >= 2");
  auto d = detail::all_differences(x, y);
  std::vector<double> alphas{0.01, 0.05, 0.10};
  for (std::size_t i = 0; i < grid_size; ++i)
    alphas.push_back(0.001 + 0.998 * static_cast<double>(i) / static_cast<double>(grid_size - 1));
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
               alphas.end());
  ConfidenceCurve c;
  std::size_t h = d.size() / 2;
  c.point_estimate = d.size() % 2 ? d[h] : 0.5 * (d[h - 1] + d[h]);
  for (double a : alphas) {
    auto [lo, hi] = detail::interval_from_sorted(d, x.size(), a);
    c.levels.push_back({a, lo, hi});
  }
  return c;
}

}  // namespace optistat
