#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "omnibus.hpp"
#include "rng.hpp"

namespace optistat {

/// Weighted counts of dominance statements. Pattern bit (m-1-c) is set when
/// the first algorithm is worse ('>') on measure c.
struct DominanceTally {
  std::size_t m = 0;
  std::vector<double> counts;
  double total = 0;

  std::string pattern(std::size_t p) const {
    std::string s(m, '<');
    for (std::size_t c = 0; c < m; ++c)
      if ((p >> (m - 1 - c)) & 1) s[c] = '>';
    return s;
  }

  std::size_t index(const std::string& pattern) const {
    if (pattern.size() != m) throw ValueError("pattern length must equal the number of measures");
    std::size_t p = 0;
    for (char ch : pattern) {
      if (ch != '<' && ch != '>') throw ValueError("patterns use '<' and '>' only");
      p = (p << 1) | (ch == '>' ? 1u : 0u);
    }
    return p;
  }

  static DominanceTally from_counts(std::size_t m, std::vector<double> counts) {
    if (m < 1 || m > 8) throw SizeError("multi-measure tests support 1 <= m <= 8 measures");
    if (counts.size() != (std::size_t{1} << m)) throw ShapeError("tally needs 2^m counts");
    DominanceTally t{m, std::move(counts), 0};
    for (double c : t.counts) {
      if (!(c >= 0) || !std::isfinite(c)) throw ValueError("tally counts must be finite and >= 0");
      t.total += c;
    }
    return t;
  }
};

inline DominanceTally dominance_tally(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("measure matrices differ in shape");
  std::size_t m = static_cast<std::size_t>(a.cols());
  if (m < 1 || m > 8) throw SizeError("multi-measure tests support 1 <= m <= 8 measures");
  DominanceTally t{m, std::vector<double>(std::size_t{1} << m, 0.0), 0};
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::size_t fixed = 0, free = 0;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t bit = std::size_t{1} << (m - 1 - c);
      double x = a(i, static_cast<Eigen::Index>(c)), y = b(i, static_cast<Eigen::Index>(c));
      if (x > y) fixed |= bit;
      else if (x == y) free |= bit;
    }
    double w = 1.0 / static_cast<double>(std::size_t{1} << __builtin_popcountll(free));
    for (std::size_t sub = free;; sub = (sub - 1) & free) {
      t.counts[fixed | sub] += w;
      if (sub == 0) break;
    }
    t.total += 1;
  }
  return t;
}

struct MultiMeasureReport {
  std::string test;
  DominanceTally tally;
  std::string best_pattern;
  double lambda = 1;
  double p_value = 1;        // GLRT: parametric bootstrap
  double p_asymptotic = 1;   // GLRT: chi-square(1) on -2 ln lambda
  std::vector<double> pattern_probabilities;  // Bayesian
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

// Returns lambda and writes the top two pattern indices.
inline double glrt_lambda(const std::vector<double>& c, std::size_t* top = nullptr,
                          std::size_t* second = nullptr) {
  std::size_t i1 = 0;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] > c[i1]) i1 = i;
  std::size_t i2 = i1 == 0 ? 1 : 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (i != i1 && c[i] > c[i2]) i2 = i;
  if (top) *top = i1;
  if (second) *second = i2;
  double c1 = c[i1], c2 = c[i2], s = c1 + c2;
  if (c1 == c2) return 1.0;
  double log_lambda = xlogx(s) - s * std::log(2.0) - xlogx(c1) - xlogx(c2);
  return std::exp(std::min(0.0, log_lambda));
}

}  // namespace detail

/// Likelihood-ratio test of "the most frequent dominance statement is not
/// more probable than the runner-up".
inline MultiMeasureReport glrt_multimeasure(const DominanceTally& t, const TestConfig& cfg,
                                            std::size_t resamples = 10000) {
  cfg.validate();
  if (t.counts.size() < 2) throw SizeError("tally needs at least two patterns");
  if (!(t.total >= 1)) throw DegenerateError("tally total must be at least 1");
  MultiMeasureReport r{"glrt_multimeasure", t};
  std::size_t i1, i2;
  r.lambda = detail::glrt_lambda(t.counts, &i1, &i2);
  r.best_pattern = t.pattern(i1);
  r.p_asymptotic = dist::chi2_sf(-2 * std::log(r.lambda), 1);

  std::vector<double> theta(t.counts);
  theta[i1] = theta[i2] = 0.5 * (t.counts[i1] + t.counts[i2]);
  std::vector<double> cdf(theta.size());
  double acc = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) cdf[i] = acc += theta[i] / t.total;
  auto draws = static_cast<std::size_t>(std::llround(t.total));
  double observed = r.lambda * (1 + 1e-12);

  std::size_t parts = (resamples + kPartitionSize - 1) / kPartitionSize;
  std::vector<std::size_t> hits(parts, 0);
  for_each_partition(resamples, cfg.seed, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    std::vector<double> c(theta.size());
    std::size_t h = 0;
    for (std::size_t s = b; s < e; ++s) {
      std::fill(c.begin(), c.end(), 0.0);
      for (std::size_t d = 0; d < draws; ++d) {
        double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        c[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), c.size() - 1)] += 1;
      }
      h += detail::glrt_lambda(c) <= observed;
    }
    hits[b / kPartitionSize] = h;
  });
  std::size_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  r.p_value = static_cast<double>(total_hits) / static_cast<double>(resamples);
  r.resamples = resamples;
  r.seed = cfg.seed;
  return r;
}

/// Posterior probability that each dominance statement is the most probable,
/// under a symmetric Dirichlet prior of total mass s.
inline MultiMeasureReport bayes_multimeasure(const DominanceTally& t, const TestConfig& cfg) {
  cfg.validate();
  if (!(t.total >= 1)) throw DegenerateError("tally total must be at least 1");
  std::size_t P = t.counts.size();
  std::vector<double> alpha(P);
  for (std::size_t i = 0; i < P; ++i) alpha[i] = t.counts[i] + cfg.prior_strength / static_cast<double>(P);
  std::size_t parts = (cfg.mc_samples + kPartitionSize - 1) / kPartitionSize;
  std::vector<std::vector<std::size_t>> wins(parts, std::vector<std::size_t>(P, 0));
  for_each_partition(cfg.mc_samples, cfg.seed, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    std::vector<double> d;
    auto& w = wins[b / kPartitionSize];
    for (std::size_t s = b; s < e; ++s) {
      rng.dirichlet(alpha, d);
      ++w[static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin())];
    }
  });
  MultiMeasureReport r{"bayes_multimeasure", t};
  r.pattern_probabilities.assign(P, 0.0);
  for (const auto& w : wins)
    for (std::size_t i = 0; i < P; ++i) r.pattern_probabilities[i] += static_cast<double>(w[i]);
  for (auto& p : r.pattern_probabilities) p /= static_cast<double>(cfg.mc_samples);
  r.best_pattern = t.pattern(static_cast<std::size_t>(
      std::max_element(r.pattern_probabilities.begin(), r.pattern_probabilities.end()) -
      r.pattern_probabilities.begin()));
  r.lambda = detail::glrt_lambda(t.counts);
  r.resamples = cfg.mc_samples;
  r.seed = cfg.seed;
  return r;
}

/// Paired Hotelling T^2 test of a zero mean difference vector.
inline OmnibusReport hotelling_t2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double alpha = 0.05) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("measure matrices differ in shape");
  Eigen::Index n = a.rows(), m = a.cols();
  if (m < 1) throw SizeError("Hotelling needs at least one measure");
  if (n <= m) throw SizeError("Hotelling needs more rows than measures");
  Eigen::MatrixXd d = a - b;
  Eigen::VectorXd mean = d.colwise().mean().transpose();
  Eigen::MatrixXd C = d.rowwise() - mean.transpose();
  Eigen::MatrixXd S = (C.transpose() * C) / static_cast<double>(n - 1);
  OmnibusReport r{"hotelling_t2"};
  r.alpha = alpha;
  double N = static_cast<double>(n), M = static_cast<double>(m);
  r.df = {M, N - M};
  double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if (mean.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    r.statistic = 0;
    r.p_value = 1;
    r.decide();
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw DegenerateError("singular covariance of the paired differences");
  double t2 = N * mean.dot(S.ldlt().solve(mean));
  r.statistic = t2;
  r.p_value = dist::f_sf(t2 * (N - M) / (M * (N - 1)), M, N - M);
  r.decide();
  return r;
}

}  // namespace optistat
