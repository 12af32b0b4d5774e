#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "ranking.hpp"

namespace optistat {

struct ScoreRow {
  std::string algorithm;
  double se = 0;  // weighted summed error
  double sr = 0;  // weighted summed rank
  double score1 = 0;
  double score2 = 0;
  double score = 0;
};

struct ScoreTable {
  std::vector<ScoreRow> rows;  // by descending score
  std::vector<double> weights;

  const ScoreRow& row(const std::string& algorithm) const {
    for (const auto& r : rows)
      if (r.algorithm == algorithm) return r;
    throw UnknownIdError("unknown algorithm '" + algorithm + "'");
  }
};

inline const std::vector<double>& default_cec_weights() {
  static const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  return w;
}

namespace detail {

inline double ratio_score(double v, double vmin) {
  if (v <= 0) return 50.0;
  return 50.0 * (1.0 - (v - vmin) / v);
}

}  // namespace detail

/// CEC'17 competition scores over one results matrix per dimension.
inline ScoreTable cec_scores(const std::vector<ResultsMatrix>& matrices,
                             const std::vector<double>& weights = default_cec_weights()) {
  if (matrices.empty()) throw EmptyInputError("scoring needs at least one matrix");
  if (weights.size() != matrices.size()) throw ShapeError("one weight per dimension is required");
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::fabs(wsum - 1.0) > 1e-9) throw ValueError("dimension weights must sum to 1");
  for (double w : weights)
    if (!(w >= 0)) throw ValueError("dimension weights must be non-negative");

  const auto& algs = matrices[0].algorithms();
  std::vector<std::string> sorted_algs(algs);
  std::sort(sorted_algs.begin(), sorted_algs.end());
  std::size_t k = algs.size();
  std::vector<double> se(k, 0.0), sr(k, 0.0);
  for (std::size_t d = 0; d < matrices.size(); ++d) {
    std::vector<std::string> other(matrices[d].algorithms());
    std::sort(other.begin(), other.end());
    if (other != sorted_algs) throw ShapeError("algorithm sets differ between dimensions");
    auto aligned = matrices[d].select(algs);
    Eigen::MatrixXd v = aligned.scores();
    Eigen::MatrixXd r = friedman_ranks(aligned).ranks;
    for (std::size_t j = 0; j < k; ++j) {
      se[j] += weights[d] * v.col(static_cast<Eigen::Index>(j)).sum();
      sr[j] += weights[d] * r.col(static_cast<Eigen::Index>(j)).sum();
    }
  }
  double se_min = *std::min_element(se.begin(), se.end());
  double sr_min = *std::min_element(sr.begin(), sr.end());
  ScoreTable t;
  t.weights = weights;
  for (std::size_t j = 0; j < k; ++j) {
    ScoreRow row{algs[j], se[j], sr[j], detail::ratio_score(se[j], se_min),
                 detail::ratio_score(sr[j], sr_min)};
    row.score = row.score1 + row.score2;
    t.rows.push_back(row);
  }
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const ScoreRow& a, const ScoreRow& b) { return a.score > b.score; });
  return t;
}

}  // namespace optistat
