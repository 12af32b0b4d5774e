#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "ranking.hpp"

namespace optistat {

struct PageReport {
  double L = 0;
  double z = 0;
  double p_value = 1;  // upper tail: differences a - b increase along the run
  double alpha = 0.05;
  std::size_t n = 0;
  std::size_t c = 0;
  std::string first, second;
  /// Name of the algorithm that converges faster, or "inconclusive".
  std::string direction = "inconclusive";
  bool underflow = false;
};

/// Values to rank for one row of differences a - b once the optimum-reached
/// rules are applied. Reached indices are 1-based cut numbers.
inline std::vector<double> convergence_rank_adjust(std::vector<double> diff,
                                                   std::optional<std::size_t> a_reached,
                                                   std::optional<std::size_t> b_reached) {
  if (!a_reached && !b_reached) return diff;
  if (a_reached && b_reached && *a_reached == *b_reached) return diff;
  bool a_first = a_reached && (!b_reached || *a_reached < *b_reached);
  std::size_t t = a_first ? *a_reached : *b_reached;
  if (t < 1 || t > diff.size()) throw ValueError("reached cut index out of range");
  double hi = *std::max_element(diff.begin(), diff.end());
  double lo = *std::min_element(diff.begin(), diff.end());
  double step = 1.0;
  for (std::size_t j = t - 1, s = 1; j < diff.size(); ++j, ++s)
    diff[j] = a_first ? hi + step * static_cast<double>(s) : lo - step * static_cast<double>(s);
  return diff;
}

/// Page statistic L = sum_j j * R_j from an n x c matrix of values to rank
/// within rows.
inline double page_statistic(const Eigen::MatrixXd& values) {
  double L = 0;
  std::vector<double> row(values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) row[j] = values(i, j);
    auto r = rank_with_ties(row);
    for (std::size_t j = 0; j < r.size(); ++j) L += static_cast<double>(j + 1) * r[j];
  }
  return L;
}

/// One-sided Gaussian p-value P(L >= l) for n rows and c columns.
inline double page_pvalue(double L, std::size_t n, std::size_t c, double* z_out = nullptr) {
  double N = static_cast<double>(n), C = static_cast<double>(c);
  double z = (12 * L - 3 * N * C * (C + 1) * (C + 1)) / std::sqrt(N * C * C * (C + 1) * (C * C - 1));
  if (z_out) *z_out = z;
  return dist::normal_sf(z);
}

/// Page trend test on the convergence of algorithm a relative to b.
inline PageReport page_test(const ConvergenceTable& a, const ConvergenceTable& b, double alpha = 0.05) {
  if (a.benchmarks != b.benchmarks) throw ShapeError("convergence tables cover different benchmarks");
  if (a.c() != b.c()) throw ShapeError("convergence tables have different numbers of cut points");
  if (a.c() < 3) throw SizeError("Page test needs c >= 3");
  if (a.n() < 2) throw SizeError("Page test needs n >= 2");
  std::size_t n = a.n(), c = a.c();
  Eigen::MatrixXd v(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d(c);
    for (std::size_t j = 0; j < c; ++j) d[j] = a.cut_values(i, j) - b.cut_values(i, j);
    auto adj = convergence_rank_adjust(std::move(d), a.first_reached(i), b.first_reached(i));
    for (std::size_t j = 0; j < c; ++j) v(i, j) = adj[j];
  }
  PageReport r;
  r.L = page_statistic(v);
  r.p_value = page_pvalue(r.L, n, c, &r.z);
  r.alpha = alpha;
  r.n = n;
  r.c = c;
  r.first = a.algorithm;
  r.second = b.algorithm;
  r.underflow = underflows(r.p_value);
  if (r.p_value < alpha) r.direction = b.algorithm;
  else if (dist::normal_cdf(r.z) < alpha) r.direction = a.algorithm;
  return r;
}

}  // namespace optistat
