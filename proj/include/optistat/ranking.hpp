#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "errors.hpp"

namespace optistat {

enum class Order { ascending, descending };

/// Midranks (average ranks for ties), 1-based.
inline std::vector<double> rank_with_ties(std::span<const double> values,
                                          Order order = Order::ascending) {
  if (values.empty()) throw EmptyInputError("cannot rank an empty list");
  std::size_t m = values.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return order == Order::ascending ? values[a] < values[b] : values[a] > values[b];
  };
  std::stable_sort(idx.begin(), idx.end(), less);
  std::vector<double> ranks(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && values[idx[j + 1]] == values[idx[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

inline std::vector<double> rank_with_ties(const std::vector<double>& values,
                                          Order order = Order::ascending) {
  return rank_with_ties(std::span<const double>(values), order);
}

enum class RankScheme { per_row, aligned, quade_weighted };

struct RankMatrix {
  /// per_row and aligned: the ranks. quade_weighted: S_ij = Q_i (r_ij - (k+1)/2).
  Eigen::MatrixXd ranks;
  RankScheme scheme = RankScheme::per_row;
  std::vector<std::string> algorithms;
  /// quade_weighted only: within-row ranks r_ij and the range ranks Q_i.
  Eigen::MatrixXd row_ranks;
  Eigen::VectorXd weights;

  std::size_t n() const { return static_cast<std::size_t>(ranks.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(ranks.cols()); }

  /// Per-algorithm average rank. For the Quade scheme this is the weighted
  /// average rank T_j = sum_i Q_i r_ij / (n(n+1)/2).
  Eigen::VectorXd mean_ranks() const {
    if (scheme == RankScheme::quade_weighted) {
      double total = weights.sum();
      return (row_ranks.transpose() * weights) / total;
    }
    return ranks.colwise().mean().transpose();
  }

  std::size_t index_of(const std::string& algorithm) const {
    auto it = std::find(algorithms.begin(), algorithms.end(), algorithm);
    if (it == algorithms.end()) throw UnknownIdError("unknown algorithm '" + algorithm + "'");
    return static_cast<std::size_t>(it - algorithms.begin());
  }
};

namespace detail {

inline Eigen::MatrixXd row_midranks(const Eigen::MatrixXd& v) {
  Eigen::MatrixXd r(v.rows(), v.cols());
  std::vector<double> row(v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) row[j] = v(i, j);
    auto rr = rank_with_ties(row);
    for (Eigen::Index j = 0; j < v.cols(); ++j) r(i, j) = rr[j];
  }
  return r;
}

}  // namespace detail

/// Within-benchmark ranks, best (lowest score) = 1.
inline RankMatrix friedman_ranks(const ResultsMatrix& m) {
  return {detail::row_midranks(m.scores()), RankScheme::per_row, m.algorithms(), {}, {}};
}

/// Joint ranks of the residuals from each row's mean.
inline RankMatrix aligned_ranks(const ResultsMatrix& m) {
  Eigen::MatrixXd s = m.scores();
  Eigen::VectorXd means = s.rowwise().mean();
  Eigen::MatrixXd resid = s.colwise() - means;
  std::vector<double> flat(resid.size());
  for (Eigen::Index i = 0; i < resid.rows(); ++i)
    for (Eigen::Index j = 0; j < resid.cols(); ++j) flat[i * resid.cols() + j] = resid(i, j);
  auto r = rank_with_ties(flat);
  Eigen::MatrixXd ranks(resid.rows(), resid.cols());
  for (Eigen::Index i = 0; i < resid.rows(); ++i)
    for (Eigen::Index j = 0; j < resid.cols(); ++j) ranks(i, j) = r[i * resid.cols() + j];
  return {std::move(ranks), RankScheme::aligned, m.algorithms(), {}, {}};
}

inline RankMatrix quade_weighted_ranks(const ResultsMatrix& m) {
  if (m.n() < 2) throw SizeError("Quade ranks need at least 2 benchmarks");
  Eigen::MatrixXd s = m.scores();
  std::vector<double> ranges(m.n());
  for (std::size_t i = 0; i < m.n(); ++i) ranges[i] = s.row(i).maxCoeff() - s.row(i).minCoeff();
  auto q = rank_with_ties(ranges);
  Eigen::MatrixXd r = detail::row_midranks(s);
  Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
  double centre = (static_cast<double>(m.k()) + 1.0) / 2.0;
  Eigen::MatrixXd S = w.asDiagonal() * (r.array() - centre).matrix();
  return {std::move(S), RankScheme::quade_weighted, m.algorithms(), std::move(r), std::move(w)};
}

/// Classical Friedman chi-square from per-row ranks (no tie correction).
inline double friedman_statistic(const Eigen::MatrixXd& ranks) {
  double n = static_cast<double>(ranks.rows());
  double k = static_cast<double>(ranks.cols());
  Eigen::VectorXd R = ranks.colwise().sum().transpose();
  return 12.0 / (n * k * (k + 1.0)) * R.squaredNorm() - 3.0 * n * (k + 1.0);
}

/// Exact null distribution of the Friedman statistic under independent
/// within-row permutations: sorted (value, probability) atoms.
struct FriedmanPermutation {
  double statistic = 0;
  std::vector<std::pair<double, double>> atoms;

  double p_at_least(double t) const {
    double p = 0;
    for (auto [v, w] : atoms)
      if (v >= t - 1e-9) p += w;
    return std::min(p, 1.0);
  }
  double p_greater(double t) const {
    double p = 0;
    for (auto [v, w] : atoms)
      if (v > t + 1e-9) p += w;
    return std::min(p, 1.0);
  }
};

inline FriedmanPermutation friedman_permutation_distribution(const ResultsMatrix& m) {
  std::size_t n = m.n(), k = m.k();
  double fact = 1;
  for (std::size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
  double arrangements = std::pow(fact, static_cast<double>(n));
  if (static_cast<double>(n) * arrangements > 1e7)
    throw SizeError("permutation enumeration exceeds 1e7 steps");

  Eigen::MatrixXd r = detail::row_midranks(m.scores());
  std::vector<std::vector<std::vector<double>>> perms(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> p(k);
    std::iota(p.begin(), p.end(), 0);
    do {
      std::vector<double> row(k);
      for (std::size_t j = 0; j < k; ++j) row[j] = r(i, p[j]);
      perms[i].push_back(std::move(row));
    } while (std::next_permutation(p.begin(), p.end()));
  }

  FriedmanPermutation out;
  out.statistic = friedman_statistic(r);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(arrangements));
  std::vector<std::size_t> choice(n, 0);
  Eigen::MatrixXd cur(n, k);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) cur(i, j) = perms[i][choice[i]][j];
    values.push_back(friedman_statistic(cur));
    std::size_t i = 0;
    while (i < n && ++choice[i] == perms[i].size()) choice[i++] = 0;
    if (i == n) break;
  }
  std::sort(values.begin(), values.end());
  double w = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    if (!out.atoms.empty() && std::fabs(out.atoms.back().first - v) <= 1e-9)
      out.atoms.back().second += w;
    else
      out.atoms.emplace_back(v, w);
  }
  return out;
}

/// Exact permutation p-value P(T >= t_obs) of the Friedman statistic.
inline double permutation_oracle_friedman(const ResultsMatrix& m) {
  auto d = friedman_permutation_distribution(m);
  return d.p_at_least(d.statistic);
}

}  // namespace optistat
