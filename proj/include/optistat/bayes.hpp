#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "ranking.hpp"
#include "rng.hpp"

namespace optistat {

struct PosteriorSummary {
  std::string test;
  double p_left = 0;
  double p_rope = 0;
  double p_right = 0;
  std::vector<std::array<double, 3>> samples;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
  std::pair<double, double> rope{0, 0};
};

namespace detail {

inline std::size_t argmax3(double a, double b, double c) {
  if (a >= b && a >= c) return 0;
  if (b >= c) return 1;
  return 2;
}

inline void finish_summary(PosteriorSummary& s) {
  std::array<std::size_t, 3> wins{0, 0, 0};
  for (const auto& t : s.samples) ++wins[argmax3(t[0], t[1], t[2])];
  double N = static_cast<double>(s.samples.size());
  s.p_left = static_cast<double>(wins[0]) / N;
  s.p_rope = static_cast<double>(wins[1]) / N;
  s.p_right = static_cast<double>(wins[2]) / N;
}

// 0 = left (below the rope), 1 = rope, 2 = right.
inline int rope_region(double z, std::pair<double, double> rope) {
  return z < rope.first ? 0 : (z > rope.second ? 2 : 1);
}

}  // namespace detail

/// Bayesian sign test: posterior Dirichlet over (left, rope, right) for
/// z = x - y; left means x is lower.
inline PosteriorSummary bayes_sign(const std::vector<double>& x, const std::vector<double>& y,
                                   const TestConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size()) throw ShapeError("paired samples must have equal length");
  if (x.empty()) throw EmptyInputError("paired samples are empty");
  std::vector<double> alpha(3, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) alpha[detail::rope_region(x[i] - y[i], cfg.rope)] += 1;
  alpha[detail::rope_region(cfg.z0, cfg.rope)] += cfg.prior_strength;
  PosteriorSummary s{"bayes_sign"};
  s.mc_samples = cfg.mc_samples;
  s.seed = cfg.seed;
  s.rope = cfg.rope;
  s.samples.resize(cfg.mc_samples);
  for_each_partition(cfg.mc_samples, cfg.seed, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    std::vector<double> d;
    for (std::size_t i = b; i < e; ++i) {
      rng.dirichlet(alpha, d);
      s.samples[i] = {d[0], d[1], d[2]};
    }
  });
  detail::finish_summary(s);
  return s;
}

/// Bayesian signed-rank test: theta_c = sum over ordered pairs (i, j) of
/// w_i w_j [(z_i + z_j)/2 in region c], with z_0 the prior pseudo-observation.
inline PosteriorSummary bayes_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                          const TestConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size()) throw ShapeError("paired samples must have equal length");
  if (x.empty()) throw EmptyInputError("paired samples are empty");
  std::size_t n = x.size() + 1;
  std::vector<double> z(n);
  z[0] = cfg.z0;
  for (std::size_t i = 1; i < n; ++i) z[i] = x[i - 1] - y[i - 1];
  std::vector<int> region(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) region[i * n + j] = detail::rope_region(0.5 * (z[i] + z[j]), cfg.rope);
  std::vector<double> alpha(n, 1.0);
  alpha[0] = cfg.prior_strength;

  PosteriorSummary s{"bayes_signed_rank"};
  s.mc_samples = cfg.mc_samples;
  s.seed = cfg.seed;
  s.rope = cfg.rope;
  s.samples.resize(cfg.mc_samples);
  for_each_partition(cfg.mc_samples, cfg.seed, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    std::vector<double> w;
    for (std::size_t t = b; t < e; ++t) {
      rng.dirichlet(alpha, w);
      std::array<double, 3> th{0, 0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 3> row{0, 0, 0};
        for (std::size_t j = 0; j < n; ++j) row[region[i * n + j]] += w[j];
        for (int c = 0; c < 3; ++c) th[c] += w[i] * row[c];
      }
      double tot = th[0] + th[1] + th[2];
      s.samples[t] = {th[0] / tot, th[1] / tot, th[2] / tot};
    }
  });
  detail::finish_summary(s);
  return s;
}

enum class IdpDecision { first_wins, second_wins, no_dominance, indeterminate };

inline const char* decision_name(IdpDecision d) {
  switch (d) {
    case IdpDecision::first_wins: return "first_wins";
    case IdpDecision::second_wins: return "second_wins";
    case IdpDecision::no_dominance: return "no_dominance";
    case IdpDecision::indeterminate: return "indeterminate";
  }
  return "?";
}

struct IdpReport {
  double lower_bound = 0;
  double upper_bound = 0;
  double level = 0.95;
  IdpDecision decision = IdpDecision::indeterminate;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

inline IdpDecision idp_decide(double lower, double upper, double level) {
  double lo_cut = 1 - level;
  if (lower > level && upper > level) return IdpDecision::first_wins;
  if (lower < lo_cut && upper < lo_cut) return IdpDecision::second_wins;
  if (lower >= lo_cut && upper <= level) return IdpDecision::no_dominance;
  return IdpDecision::indeterminate;
}

/// Imprecise DP Wilcoxon test on P(X <= Y) >= 0.5. The prior
/// pseudo-observations are placed at the extremes that minimise (lower
/// bound) and maximise (upper bound) the statistic; both bounds share draws.
inline IdpReport idp_wilcoxon(const std::vector<double>& x, const std::vector<double>& y,
                              const TestConfig& cfg, double level = 0.95) {
  cfg.validate();
  if (x.empty() || y.empty()) throw EmptyInputError("IDP samples must be non-empty");
  std::size_t n1 = x.size(), n2 = y.size();
  Eigen::MatrixXd I(n1, n2);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) I(i, j) = x[i] <= y[j] ? 1.0 : 0.0;
  std::vector<double> au(n1 + 1, 1.0), av(n2 + 1, 1.0);
  au[0] = av[0] = cfg.prior_strength;

  std::size_t parts = (cfg.mc_samples + kPartitionSize - 1) / kPartitionSize;
  std::vector<std::size_t> lo_count(parts, 0), hi_count(parts, 0);
  for_each_partition(cfg.mc_samples, cfg.seed, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
    std::vector<double> u, v;
    Eigen::VectorXd ux(n1), vy(n2);
    std::size_t lo = 0, hi = 0;
    for (std::size_t t = b; t < e; ++t) {
      rng.dirichlet(au, u);
      rng.dirichlet(av, v);
      for (std::size_t i = 0; i < n1; ++i) ux[i] = u[i + 1];
      for (std::size_t j = 0; j < n2; ++j) vy[j] = v[j + 1];
      double lower = ux.dot(I * vy);
      double upper = lower + u[0] + (1 - u[0]) * v[0];
      lo += lower >= 0.5;
      hi += upper >= 0.5;
    }
    lo_count[b / kPartitionSize] = lo;
    hi_count[b / kPartitionSize] = hi;
  });
  IdpReport r;
  double N = static_cast<double>(cfg.mc_samples);
  std::size_t lo = 0, hi = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    lo += lo_count[p];
    hi += hi_count[p];
  }
  r.lower_bound = static_cast<double>(lo) / N;
  r.upper_bound = static_cast<double>(hi) / N;
  r.level = level;
  r.decision = idp_decide(r.lower_bound, r.upper_bound, level);
  r.mc_samples = cfg.mc_samples;
  r.seed = cfg.seed;
  return r;
}

enum class BayesFriedmanMethod { large_n, sampled };

struct BayesFriedmanReport {
  std::vector<std::string> algorithms;
  std::vector<double> mean_ranks;  // observed mean rank vector
  double statistic = 0;
  double rho = 0;
  double gamma = 0.05;
  bool rejected = false;
  bool imprecise = false;
  BayesFriedmanMethod method = BayesFriedmanMethod::large_n;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// (d' S^-1 d) with the conventions: d = 0 gives 0, a singular S with d outside
// its range gives +inf, and d inside the range of a singular S is degenerate.
inline double mahalanobis(const Eigen::MatrixXd& S, const Eigen::VectorXd& d) {
  double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if (d.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const auto& ev = es.eigenvalues();
  double tol = 1e-10 * std::max(scale, ev.cwiseAbs().maxCoeff());
  Eigen::VectorXd proj = es.eigenvectors().transpose() * d;
  double out = 0;
  bool singular = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) {
      out += proj[i] * proj[i] / ev[i];
    } else {
      singular = true;
      if (std::fabs(proj[i]) > 1e-9 * std::max(1.0, d.norm())) return std::numeric_limits<double>::infinity();
    }
  }
  if (singular)
    throw DegenerateError("singular rank covariance; use the sampled path or more benchmarks");
  return out;
}

}  // namespace detail

/// Bayesian Friedman test on the expected rank vector.
inline BayesFriedmanReport bayes_friedman(const ResultsMatrix& m, double gamma, bool imprecise,
                                          const TestConfig& cfg) {
  cfg.validate();
  std::size_t k = m.k(), n = m.n();
  if (k < 3) throw SizeError("Bayesian Friedman needs at least 3 algorithms");
  if (n < 2) throw SizeError("Bayesian Friedman needs at least 2 benchmarks");
  if (!(gamma > 0 && gamma < 1)) throw ValueError("gamma must lie in (0, 1)");
  Eigen::MatrixXd R = friedman_ranks(m).ranks;  // n x k midranks
  Eigen::VectorXd mu = R.colwise().mean().transpose();
  double centre = (static_cast<double>(k) + 1) / 2;
  Eigen::VectorXd mu0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), centre);
  Eigen::Index q = static_cast<Eigen::Index>(k - 1);

  BayesFriedmanReport r;
  r.algorithms = m.algorithms();
  r.mean_ranks.assign(mu.data(), mu.data() + mu.size());
  r.gamma = gamma;
  r.imprecise = imprecise;
  r.mc_samples = cfg.mc_samples;
  r.seed = cfg.seed;

  // Pseudo-observations: the null centre, and for the imprecise version also
  // the reverse of the observed ranking.
  std::vector<Eigen::VectorXd> priors{mu0};
  if (imprecise) {
    std::vector<double> mv(mu.data(), mu.data() + mu.size());
    auto rk = rank_with_ties(mv, Order::descending);
    priors.emplace_back(Eigen::Map<Eigen::VectorXd>(rk.data(), static_cast<Eigen::Index>(k)));
  }
  double s = cfg.prior_strength;

  if (n >= 4 * k) {
    r.method = BayesFriedmanMethod::large_n;
    double N = static_cast<double>(n), K = static_cast<double>(k);
    r.rho = dist::f_quantile(1 - gamma, K - 1, N - K + 1) * (N - 1) * (K - 1) / (N - K + 1);
    Eigen::MatrixXd C = R.rowwise() - mu.transpose();
    Eigen::MatrixXd Sigma = (C.transpose() * C) / (N - 1) / N;
    bool all_reject = true;
    double stat = std::numeric_limits<double>::infinity();
    for (const auto& r0 : priors) {
      Eigen::VectorXd post = (s * r0 + N * mu) / (s + N);
      double st = detail::mahalanobis(Sigma.topLeftCorner(q, q), (post - mu0).head(q));
      stat = std::min(stat, st);
      all_reject = all_reject && st > r.rho;
    }
    r.statistic = stat;
    r.rejected = all_reject;
    return r;
  }

  r.method = BayesFriedmanMethod::sampled;
  std::size_t draws = cfg.mc_samples;
  bool all_reject = true;
  double stat_min = std::numeric_limits<double>::infinity();
  double rho_max = 0;
  for (std::size_t pi = 0; pi < priors.size(); ++pi) {
    Eigen::MatrixXd M(draws, q);
    std::vector<double> alpha(n + 1, 1.0);
    alpha[0] = s;
    for_each_partition(draws, cfg.seed + pi, cfg.threads, [&](CounterRng& rng, std::size_t b, std::size_t e) {
      std::vector<double> w;
      for (std::size_t t = b; t < e; ++t) {
        rng.dirichlet(alpha, w);
        Eigen::VectorXd v = w[0] * priors[pi];
        for (std::size_t i = 0; i < n; ++i) v += w[i + 1] * R.row(static_cast<Eigen::Index>(i)).transpose();
        M.row(static_cast<Eigen::Index>(t)) = v.head(q).transpose();
      }
    });
    Eigen::VectorXd mean = M.colwise().mean().transpose();
    Eigen::MatrixXd D = M.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (D.transpose() * D) / static_cast<double>(draws - 1);
    Eigen::VectorXd d0 = mu0.head(q) - mean;
    double st = detail::mahalanobis(cov, d0);
    stat_min = std::min(stat_min, st);
    if (st == 0 || std::isinf(st)) {
      all_reject = all_reject && std::isinf(st);
      continue;
    }
    std::vector<double> dist(draws);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    for (std::size_t t = 0; t < draws; ++t) {
      Eigen::VectorXd dv = D.row(static_cast<Eigen::Index>(t)).transpose();
      dist[t] = dv.dot(ldlt.solve(dv));
    }
    std::size_t qi = static_cast<std::size_t>(std::ceil((1 - gamma) * static_cast<double>(draws))) - 1;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(qi), dist.end());
    double thr = dist[qi];
    rho_max = std::max(rho_max, thr);
    all_reject = all_reject && st > thr;
  }
  r.statistic = stat_min;
  r.rho = rho_max;
  r.rejected = all_reject;
  return r;
}

}  // namespace optistat
