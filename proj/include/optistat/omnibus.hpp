#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "ranking.hpp"

namespace optistat {

struct OmnibusReport {
  std::string test;
  double statistic = 0;
  std::vector<double> df;
  double p_value = 1;
  bool underflow = false;
  double alpha = 0.05;
  bool rejected = false;
  std::vector<std::string> algorithms;
  std::vector<double> mean_ranks;
  std::vector<std::string> notes;

  void decide() {
    underflow = underflows(p_value);
    rejected = p_value < alpha;
  }
};

inline OmnibusReport anova_oneway(const ResultsMatrix& m, double alpha = 0.05) {
  if (m.k() < 2 || m.n() < 2) throw SizeError("ANOVA needs k >= 2 groups of n >= 2");
  Eigen::MatrixXd v = m.scores();
  double grand = v.mean();
  Eigen::RowVectorXd means = v.colwise().mean();
  double n = static_cast<double>(m.n()), k = static_cast<double>(m.k());
  double ssb = n * (means.array() - grand).square().sum();
  double ssw = (v.rowwise() - means).squaredNorm();
  if (ssb + ssw <= 0) throw DegenerateError("ANOVA on data with zero total variance");
  double d1 = k - 1, d2 = k * (n - 1);
  OmnibusReport r{"anova"};
  r.statistic = ssw > 0 ? (ssb / d1) / (ssw / d2) : std::numeric_limits<double>::infinity();
  r.df = {d1, d2};
  r.p_value = dist::f_sf(r.statistic, d1, d2);
  r.alpha = alpha;
  r.algorithms = m.algorithms();
  r.decide();
  return r;
}

enum class FriedmanVariant { chi_square, iman_davenport, aligned, quade };

inline const char* variant_name(FriedmanVariant v) {
  switch (v) {
    case FriedmanVariant::chi_square: return "friedman";
    case FriedmanVariant::iman_davenport: return "iman_davenport";
    case FriedmanVariant::aligned: return "friedman_aligned";
    case FriedmanVariant::quade: return "quade";
  }
  return "?";
}

inline OmnibusReport friedman_test(const ResultsMatrix& m,
                                   FriedmanVariant variant = FriedmanVariant::chi_square,
                                   double alpha = 0.05) {
  if (m.k() < 2) throw SizeError("Friedman-type tests need k >= 2");
  if (m.n() < 2) throw SizeError("Friedman-type tests need n >= 2");
  double n = static_cast<double>(m.n()), k = static_cast<double>(m.k());
  OmnibusReport r{variant_name(variant)};
  r.alpha = alpha;
  r.algorithms = m.algorithms();
  if (m.k() == 2) r.notes.push_back("k = 2: a pairwise test is more appropriate");

  switch (variant) {
    case FriedmanVariant::chi_square:
    case FriedmanVariant::iman_davenport: {
      auto rk = friedman_ranks(m);
      auto mr = rk.mean_ranks();
      r.mean_ranks.assign(mr.data(), mr.data() + mr.size());
      double chi = friedman_statistic(rk.ranks);
      if (variant == FriedmanVariant::chi_square) {
        r.statistic = chi;
        r.df = {k - 1};
        r.p_value = dist::chi2_sf(chi, k - 1);
      } else {
        double denom = n * (k - 1) - chi;
        double d1 = k - 1, d2 = (k - 1) * (n - 1);
        r.statistic = denom > 0 ? (n - 1) * chi / denom : std::numeric_limits<double>::infinity();
        r.df = {d1, d2};
        r.p_value = dist::f_sf(r.statistic, d1, d2);
      }
      break;
    }
    case FriedmanVariant::aligned: {
      auto rk = aligned_ranks(m);
      auto mr = rk.mean_ranks();
      r.mean_ranks.assign(mr.data(), mr.data() + mr.size());
      Eigen::VectorXd Rj = rk.ranks.colwise().sum().transpose();
      Eigen::VectorXd Ri = rk.ranks.rowwise().sum();
      double kn = k * n;
      double num = (k - 1) * (Rj.squaredNorm() - (k * n * n / 4.0) * (kn + 1) * (kn + 1));
      double den = kn * (kn + 1) * (2 * kn + 1) / 6.0 - Ri.squaredNorm() / k;
      r.statistic = den > 0 ? std::max(0.0, num / den) : 0.0;
      r.df = {k - 1};
      r.p_value = dist::chi2_sf(r.statistic, k - 1);
      break;
    }
    case FriedmanVariant::quade: {
      auto rk = quade_weighted_ranks(m);
      auto mr = rk.mean_ranks();
      r.mean_ranks.assign(mr.data(), mr.data() + mr.size());
      double A = rk.ranks.squaredNorm();
      double B = rk.ranks.colwise().sum().squaredNorm() / n;
      double d1 = k - 1, d2 = (k - 1) * (n - 1);
      if (B <= 0) r.statistic = 0;
      else if (A - B <= 1e-12 * A) r.statistic = std::numeric_limits<double>::infinity();
      else r.statistic = (n - 1) * B / (A - B);
      r.df = {d1, d2};
      r.p_value = dist::f_sf(r.statistic, d1, d2);
      break;
    }
  }
  r.decide();
  return r;
}

/// Multiple Sign test against a control. The minority sign count of each
/// comparison is compared with a binomial critical value at level alpha/(2m).
inline HypothesisFamily multiple_sign_test(const ResultsMatrix& m, const std::string& control,
                                           double alpha = 0.05) {
  std::size_t c = m.index_of(control);
  if (m.k() < 2) throw SizeError("multiple sign test needs k >= 2");
  HypothesisFamily f;
  f.mode = FamilyMode::one_vs_all;
  f.algorithms = m.algorithms();
  f.method = "multiple_sign";
  f.alpha = alpha;
  f.notes.push_back("critical values from Binomial(N, 1/2) at alpha/(2m)");
  double mm = static_cast<double>(m.k() - 1);
  auto cc = m.column(c);
  bool all_degenerate = true;
  for (std::size_t j = 0; j < m.k(); ++j) {
    if (j == c) continue;
    auto xj = m.column(j);
    long long plus = 0, minus = 0;
    for (std::size_t i = 0; i < m.n(); ++i) {
      if (xj[i] < cc[i]) ++plus;
      if (xj[i] > cc[i]) ++minus;
    }
    long long N = plus + minus, minority = std::min(plus, minus);
    Hypothesis h{c, j};
    h.z = static_cast<double>(minority);
    if (N == 0) {
      h.raw_p = h.adjusted_p = 1;
    } else {
      all_degenerate = false;
      h.raw_p = dist::clamp01(2 * dist::binom_half_cdf(minority, N));
      h.adjusted_p = std::min(1.0, mm * h.raw_p);
      long long crit = -1;
      while (crit + 1 <= N && dist::binom_half_cdf(crit + 1, N) < alpha / (2 * mm)) ++crit;
      h.rejected = minority <= crit;
    }
    f.hypotheses.push_back(h);
  }
  f.degenerate = all_degenerate;
  return f;
}

struct ShapiroWilk {
  double w = 1;
  double p_value = 1;
};

namespace detail {

inline double sw_poly(const double* c, int nord, double x) {
  double r = c[0];
  if (nord > 1) {
    double p = x * c[nord - 1];
    for (int j = nord - 2; j > 0; --j) p = (p + c[j]) * x;
    r += p;
  }
  return r;
}

}  // namespace detail

/// Shapiro-Wilk W test, algorithm AS R94.
inline ShapiroWilk shapiro_wilk(std::vector<double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw SizeError("Shapiro-Wilk needs at least 3 observations");
  if (n > 5000) throw SizeError("Shapiro-Wilk supports at most 5000 observations");
  std::sort(x.begin(), x.end());
  double range = x[n - 1] - x[0];
  if (range < 1e-19 * std::max(1.0, std::fabs(x[0]))) throw DegenerateError("constant sample");

  static const double g[2] = {-2.273, 0.459};
  static const double c1[6] = {0., 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static const double c2[6] = {0., 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double c6[3] = {-0.4803, -0.082676, 0.0030302};

  const int nn2 = n / 2;
  std::vector<double> a(nn2 + 1);  // 1-based
  const double an = n;
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    double an25 = an + 0.25, summ2 = 0;
    for (int i = 1; i <= nn2; ++i) {
      a[i] = dist::normal_quantile((i - 0.375) / an25);
      summ2 += a[i] * a[i];
    }
    summ2 *= 2;
    double ssumm2 = std::sqrt(summ2), rsn = 1 / std::sqrt(an);
    double a1 = detail::sw_poly(c1, 6, rsn) - a[1] / ssumm2;
    int i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      double a2 = -a[2] / ssumm2 + detail::sw_poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2 * a[1] * a[1] - 2 * a[2] * a[2]) / (1 - 2 * a1 * a1 - 2 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2 * a[1] * a[1]) / (1 - 2 * a1 * a1));
    }
    a[1] = a1;
    for (int i = i1; i <= nn2; ++i) a[i] /= -fac;
  }

  double sx = 0;
  for (int i = 0; i < n; ++i) sx += x[i] / range;
  sx /= n;
  double ssa = 0, ssx = 0, sax = 0;
  for (int i = 0, j = n - 1; i < n; ++i, --j) {
    // Coefficients are antisymmetric, so their mean is zero.
    double asa = i != j ? (i < j ? -1.0 : 1.0) * a[1 + std::min(i, j)] : 0.0;
    double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  double ssassx = std::sqrt(ssa * ssx);
  double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  ShapiroWilk out;
  out.w = 1 - w1;

  if (n == 3) {
    const double pi6 = 1.90985931710274, stqr = 1.04719755119660;
    out.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(out.w)) - stqr));
    return out;
  }
  double y = std::log(w1), xx = std::log(an), m, s;
  if (n <= 11) {
    double gamma = detail::sw_poly(g, 2, an);
    if (y >= gamma) {
      out.p_value = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    m = detail::sw_poly(c3, 4, an);
    s = std::exp(detail::sw_poly(c4, 4, an));
  } else {
    m = detail::sw_poly(c5, 4, xx);
    s = std::exp(detail::sw_poly(c6, 3, xx));
  }
  out.p_value = dist::normal_sf((y - m) / s);
  return out;
}

/// Levene test: one-way ANOVA on absolute deviations from the column means.
inline OmnibusReport levene_test(const ResultsMatrix& m, double alpha = 0.05) {
  if (m.k() < 2 || m.n() < 2) throw SizeError("Levene test needs k >= 2 groups of n >= 2");
  Eigen::MatrixXd v = m.scores();
  Eigen::MatrixXd z = (v.rowwise() - v.colwise().mean()).cwiseAbs();
  Eigen::RowVectorXd zm = z.colwise().mean();
  double ssw = (z.rowwise() - zm).squaredNorm();
  if (ssw <= 0) throw DegenerateError("Levene test on groups with no spread in their deviations");
  double n = static_cast<double>(m.n()), k = static_cast<double>(m.k());
  double ssb = n * (zm.array() - z.mean()).square().sum();
  double d1 = k - 1, d2 = k * (n - 1);
  OmnibusReport r{"levene"};
  r.statistic = (ssb / d1) / (ssw / d2);
  r.df = {d1, d2};
  r.p_value = dist::f_sf(r.statistic, d1, d2);
  r.alpha = alpha;
  r.algorithms = m.algorithms();
  r.decide();
  return r;
}

}  // namespace optistat
