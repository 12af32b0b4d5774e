#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "ranking.hpp"

namespace optistat {

namespace detail {

// Exchangeable-within-row variance of r_ij - r_il: 2k/(k-1) times the
// population variance of row i.
inline Eigen::VectorXd row_difference_variance(const Eigen::MatrixXd& r) {
  double k = static_cast<double>(r.cols());
  Eigen::VectorXd mean = r.rowwise().mean();
  Eigen::VectorXd var = (r.colwise() - mean).rowwise().squaredNorm() / k;
  return var * (2 * k / (k - 1));
}

inline double posthoc_standard_error(const RankMatrix& rk) {
  double n = static_cast<double>(rk.n()), k = static_cast<double>(rk.k());
  switch (rk.scheme) {
    case RankScheme::per_row:
      return std::sqrt(k * (k + 1) / (6 * n));
    case RankScheme::aligned:
      return std::sqrt(row_difference_variance(rk.ranks).sum()) / n;
    case RankScheme::quade_weighted: {
      double total = rk.weights.sum();
      auto v = row_difference_variance(rk.row_ranks);
      return std::sqrt(rk.weights.array().square().matrix().dot(v)) / total;
    }
  }
  return 0;
}

}  // namespace detail

/// Raw two-sided p-values of z_ij = (mean_j - mean_i) / SE.
inline HypothesisFamily pairwise_raw_pvalues(const RankMatrix& rk, FamilyMode mode,
                                             const std::optional<std::string>& control = std::nullopt,
                                             double alpha = 0.05) {
  HypothesisFamily f;
  f.mode = mode;
  f.algorithms = rk.algorithms;
  f.alpha = alpha;
  auto mr = rk.mean_ranks();
  double se = detail::posthoc_standard_error(rk);
  auto add = [&](std::size_t i, std::size_t j) {
    Hypothesis h{i, j};
    h.z = se > 0 ? (mr[j] - mr[i]) / se : 0.0;
    h.raw_p = h.adjusted_p = dist::normal_two_sided(h.z);
    f.hypotheses.push_back(h);
  };
  if (mode == FamilyMode::one_vs_all) {
    if (!control) throw ModeError("one_vs_all needs a control algorithm");
    std::size_t c = rk.index_of(*control);
    for (std::size_t j = 0; j < rk.k(); ++j)
      if (j != c) add(c, j);
  } else {
    if (control) rk.index_of(*control);
    for (std::size_t i = 0; i < rk.k(); ++i)
      for (std::size_t j = i + 1; j < rk.k(); ++j) add(i, j);
  }
  return f;
}

enum class AdjustMethod { bonferroni_dunn, holm, holland, hochberg, hommel, rom, li, finner, nemenyi };

inline const char* method_name(AdjustMethod m) {
  switch (m) {
    case AdjustMethod::bonferroni_dunn: return "bonferroni_dunn";
    case AdjustMethod::holm: return "holm";
    case AdjustMethod::holland: return "holland";
    case AdjustMethod::hochberg: return "hochberg";
    case AdjustMethod::hommel: return "hommel";
    case AdjustMethod::rom: return "rom";
    case AdjustMethod::li: return "li";
    case AdjustMethod::finner: return "finner";
    case AdjustMethod::nemenyi: return "nemenyi";
  }
  return "?";
}

inline AdjustMethod parse_adjust_method(const std::string& s) {
  for (auto m : {AdjustMethod::bonferroni_dunn, AdjustMethod::holm, AdjustMethod::holland,
                 AdjustMethod::hochberg, AdjustMethod::hommel, AdjustMethod::rom, AdjustMethod::li,
                 AdjustMethod::finner, AdjustMethod::nemenyi})
    if (s == method_name(m)) return m;
  throw UnknownIdError("unknown adjustment method '" + s + "'");
}

/// Rom's step-up critical values alpha_1..alpha_m (alpha_1 = alpha).
inline std::vector<double> rom_critical_values(std::size_t m, double alpha) {
  std::vector<double> c(std::max<std::size_t>(m, 2) + 1, 0.0);
  c[1] = alpha;
  c[2] = alpha / 2;
  for (std::size_t t = 3; t <= m; ++t) {
    double s = 0;
    for (std::size_t j = 1; j <= t - 1; ++j) s += std::pow(alpha, static_cast<double>(j));
    double binom = 1;  // C(t, j)
    for (std::size_t j = 1; j <= t - 2; ++j) {
      binom = binom * static_cast<double>(t - j + 1) / static_cast<double>(j);
      s -= binom * std::pow(c[j + 1], static_cast<double>(t - j));
    }
    c[t] = s / static_cast<double>(t);
  }
  return c;
}

namespace detail {

inline std::vector<std::size_t> ascending_order(const std::vector<double>& p) {
  std::vector<std::size_t> o(p.size());
  std::iota(o.begin(), o.end(), 0);
  std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  return o;
}

// R's p.adjust(method = "hommel").
inline std::vector<double> hommel(const std::vector<double>& praw) {
  std::size_t n = praw.size();
  if (n == 0) return {};
  auto o = ascending_order(praw);
  std::vector<double> p(n);
  for (std::size_t t = 0; t < n; ++t) p[t] = praw[o[t]];
  double init = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) init = std::min(init, n * p[i] / static_cast<double>(i + 1));
  std::vector<double> q(n, init), pa(n, init);
  for (std::size_t m = n - 1; m >= 2; --m) {
    std::size_t n1 = n - m + 1;  // i1 = 1..n-m+1, i2 = n-m+2..n
    double q1 = std::numeric_limits<double>::infinity();
    for (std::size_t t = 2; t <= m; ++t)
      q1 = std::min(q1, m * p[n - m + t - 1] / static_cast<double>(t));
    for (std::size_t i = 0; i < n1; ++i) q[i] = std::min(m * p[i], q1);
    for (std::size_t i = n1; i < n; ++i) q[i] = q[n1 - 1];
    for (std::size_t i = 0; i < n; ++i) pa[i] = std::max(pa[i], q[i]);
  }
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[o[t]] = std::min(1.0, std::max(pa[t], p[t]));
  return out;
}

}  // namespace detail

/// Adjusted p-values; rejection when the adjusted p-value is below alpha.
inline HypothesisFamily adjust_pvalues(HypothesisFamily f, AdjustMethod method) {
  std::size_t m = f.size();
  std::vector<double> raw(m);
  for (std::size_t t = 0; t < m; ++t) raw[t] = f.hypotheses[t].raw_p;
  auto o = detail::ascending_order(raw);
  std::vector<double> p(m), apv(m);
  for (std::size_t t = 0; t < m; ++t) p[t] = raw[o[t]];
  double M = static_cast<double>(m);

  auto step_down = [&](auto v) {
    double run = 0;
    for (std::size_t i = 0; i < m; ++i) {
      run = std::max(run, v(i));
      apv[i] = std::min(run, 1.0);
    }
  };
  auto step_up = [&](auto v) {
    double run = 1;
    for (std::size_t i = m; i-- > 0;) {
      run = std::min(run, v(i));
      apv[i] = std::min(run, 1.0);
    }
  };

  switch (method) {
    case AdjustMethod::bonferroni_dunn:
    case AdjustMethod::nemenyi:
      for (std::size_t i = 0; i < m; ++i) apv[i] = std::min(1.0, M * p[i]);
      break;
    case AdjustMethod::holm:
      step_down([&](std::size_t i) { return (M - i) * p[i]; });
      break;
    case AdjustMethod::holland:
      step_down([&](std::size_t i) { return 1 - std::pow(1 - p[i], M - i); });
      break;
    case AdjustMethod::finner:
      step_down([&](std::size_t i) { return 1 - std::pow(1 - p[i], M / (i + 1)); });
      break;
    case AdjustMethod::hochberg:
      step_up([&](std::size_t i) { return (M - i) * p[i]; });
      break;
    case AdjustMethod::rom: {
      auto c = rom_critical_values(m, 0.05);
      step_up([&](std::size_t i) { return 0.05 / c[m - i] * p[i]; });
      break;
    }
    case AdjustMethod::li:
      for (std::size_t i = 0; i < m; ++i) {
        double d = p[i] + 1 - p[m - 1];
        apv[i] = p[i] <= 0 ? 0.0 : std::min(1.0, p[i] / d);
      }
      break;
    case AdjustMethod::hommel: {
      auto h = detail::hommel(p);
      apv = h;
      break;
    }
  }
  for (std::size_t t = 0; t < m; ++t) {
    auto& h = f.hypotheses[o[t]];
    h.adjusted_p = apv[t];
    h.rejected = apv[t] < f.alpha;
  }
  f.method = method_name(method);
  return f;
}


/// S(k): the attainable numbers of simultaneously true hypotheses among the
/// k(k-1)/2 pairwise equalities.
inline std::set<std::size_t> shaffer_sets(std::size_t k) {
  if (k > 14) throw SizeError("shaffer_sets supports k <= 14");
  std::vector<std::set<std::size_t>> S(k + 1);
  S[0] = {0};
  for (std::size_t t = 1; t <= k; ++t)
    for (std::size_t j = 1; j <= t; ++j)
      for (auto x : S[t - j]) S[t].insert(j * (j - 1) / 2 + x);
  return S[k];
}

namespace detail {

inline std::size_t family_k(const HypothesisFamily& f) {
  if (f.mode != FamilyMode::all_pairs) throw ModeError("procedure needs an all_pairs family");
  std::size_t k = f.algorithms.size();
  if (f.size() != k * (k - 1) / 2) throw ShapeError("family is not the complete set of pairs");
  return k;
}

// Largest sum of C(|g|, 2) over partitions of the k algorithms into groups
// that contain no pair from `rejected` (adjacency bitmasks).
inline std::size_t max_true_hypotheses(std::size_t k, const std::vector<std::uint32_t>& rejected) {
  std::size_t full = (std::size_t{1} << k) - 1;
  std::vector<char> clique(full + 1, 0);
  clique[0] = 1;
  for (std::size_t s = 1; s <= full; ++s) {
    std::size_t low = static_cast<std::size_t>(__builtin_ctzll(s));
    std::size_t rest = s & (s - 1);
    clique[s] = clique[rest] && !(rejected[low] & rest);
  }
  std::vector<int> best(full + 1, 0);
  for (std::size_t s = 1; s <= full; ++s) {
    std::size_t low = s & (~s + 1);
    std::size_t rest = s ^ low;
    int b = -1;
    // Groups containing the lowest member of s.
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      std::size_t g = sub | low;
      if (clique[g]) {
        int sz = __builtin_popcountll(g);
        b = std::max(b, sz * (sz - 1) / 2 + best[s ^ g]);
      }
      if (sub == 0) break;
    }
    best[s] = b;
  }
  return static_cast<std::size_t>(best[full]);
}

}  // namespace detail

/// Shaffer's static or dynamic (logically constrained) step-down procedure.
inline HypothesisFamily shaffer_adjust(HypothesisFamily f, bool dynamic) {
  std::size_t k = detail::family_k(f);
  std::size_t m = f.size();
  std::vector<double> raw(m);
  for (std::size_t t = 0; t < m; ++t) raw[t] = f.hypotheses[t].raw_p;
  auto o = detail::ascending_order(raw);
  auto S = shaffer_sets(k);
  std::vector<std::uint32_t> rejected(k, 0);
  double run = 0;
  for (std::size_t i = 0; i < m; ++i) {
    auto& h = f.hypotheses[o[i]];
    std::size_t t;
    if (dynamic) {
      t = detail::max_true_hypotheses(k, rejected);
    } else {
      t = 0;
      for (auto x : S)
        if (x <= m - i) t = x;
    }
    run = std::max(run, static_cast<double>(t) * h.raw_p);
    h.adjusted_p = std::min(run, 1.0);
    h.rejected = h.adjusted_p < f.alpha;
    rejected[h.i] |= std::uint32_t{1} << h.j;
    rejected[h.j] |= std::uint32_t{1} << h.i;
  }
  f.method = dynamic ? "shaffer_dynamic" : "shaffer_static";
  return f;
}

/// Exhaustive sets for k algorithms as bitmasks over the pairs (a, b), a < b,
/// in lexicographic order. Computed once per k.
inline std::shared_ptr<const std::vector<std::uint64_t>> exhaustive_sets(std::size_t k) {
  if (k < 2 || k > 9) throw SizeError("exhaustive sets are enumerated for 2 <= k <= 9; use Shaffer");
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const std::vector<std::uint64_t>>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(k); it != cache.end()) return it->second;

  std::vector<std::vector<std::size_t>> pair_bit(k, std::vector<std::size_t>(k));
  std::size_t bit = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) pair_bit[a][b] = pair_bit[b][a] = bit++;

  std::set<std::uint64_t> sets;
  // Restricted growth strings enumerate set partitions.
  std::vector<std::size_t> g(k, 0), mx(k, 0);
  for (;;) {
    std::uint64_t mask = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (g[a] == g[b]) mask |= std::uint64_t{1} << pair_bit[a][b];
    if (mask) sets.insert(mask);
    std::size_t i = k - 1;
    while (i > 0 && g[i] == mx[i - 1] + 1) --i;
    if (i == 0) break;
    ++g[i];
    mx[i] = std::max(mx[i - 1], g[i]);
    for (std::size_t j = i + 1; j < k; ++j) {
      g[j] = 0;
      mx[j] = mx[i];
    }
  }
  auto v = std::make_shared<const std::vector<std::uint64_t>>(sets.begin(), sets.end());
  cache.emplace(k, v);
  return v;
}

/// Bergmann-Hommel procedure over all exhaustive sets.
inline HypothesisFamily bergmann_hommel(HypothesisFamily f) {
  std::size_t k = detail::family_k(f);
  auto sets = exhaustive_sets(k);
  std::vector<std::vector<std::size_t>> pair_bit(k, std::vector<std::size_t>(k));
  std::size_t bit = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) pair_bit[a][b] = pair_bit[b][a] = bit++;
  std::size_t m = f.size();
  std::vector<double> p(m, 1.0);
  for (const auto& h : f.hypotheses) p[pair_bit[h.i][h.j]] = h.raw_p;

  std::vector<double> apv(m, 0.0);
  std::uint64_t accepted = 0;
  for (std::uint64_t s : *sets) {
    double mn = 1.0;
    int size = __builtin_popcountll(s);
    for (std::uint64_t r = s; r; r &= r - 1) mn = std::min(mn, p[__builtin_ctzll(r)]);
    double v = size * mn;
    if (mn > f.alpha / size) accepted |= s;
    for (std::uint64_t r = s; r; r &= r - 1) {
      auto b = static_cast<std::size_t>(__builtin_ctzll(r));
      apv[b] = std::max(apv[b], v);
    }
  }
  for (auto& h : f.hypotheses) {
    std::size_t b = pair_bit[h.i][h.j];
    h.adjusted_p = std::min(apv[b], 1.0);
    h.rejected = !((accepted >> b) & 1);
  }
  f.method = "bergmann_hommel";
  return f;
}

/// q_{alpha,k} / sqrt(2) for the infinite-df studentized range, k = 2..20.
inline double nemenyi_q(double alpha, std::size_t k) {
  static const std::array<double, 19> q05{1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                          2.94832,  3.030878, 3.10173,  3.163684, 3.218654,
                                          3.268004, 3.312739, 3.353618, 3.39123,  3.426041,
                                          3.458425, 3.488685, 3.517073, 3.543799};
  static const std::array<double, 19> q10{1.644854, 2.052293, 2.291341, 2.459516, 2.588521,
                                          2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
                                          3.029694, 3.076733, 3.119693, 3.159199, 3.195743,
                                          3.229723, 3.261461, 3.291224, 3.319233};
  if (k < 2 || k > 20) throw SizeError("Nemenyi constants are tabulated for 2 <= k <= 20");
  if (std::fabs(alpha - 0.05) < 1e-12) return q05[k - 2];
  if (std::fabs(alpha - 0.10) < 1e-12) return q10[k - 2];
  throw UnknownIdError("unsupported alpha for Nemenyi constants; supported levels: 0.05, 0.10");
}

struct CDPlotData {
  std::vector<std::string> order;   // algorithms by ascending mean rank
  std::vector<double> mean_ranks;   // aligned with order
  double critical_difference = 0;
  double alpha = 0.05;
  std::size_t n = 0;
  /// Index ranges [first, last] into `order`.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
};

inline CDPlotData cd_plot_data_from_means(const std::vector<std::string>& algorithms,
                                          const std::vector<double>& means, std::size_t n,
                                          double alpha) {
  std::size_t k = algorithms.size();
  if (k < 3) throw SizeError("CD plot needs k >= 3");
  double q = nemenyi_q(alpha, k);
  CDPlotData d;
  d.alpha = alpha;
  d.n = n;
  double kk = static_cast<double>(k);
  d.critical_difference = q * std::sqrt(kk * (kk + 1) / (6.0 * static_cast<double>(n)));
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return means[a] < means[b]; });
  for (auto i : idx) {
    d.order.push_back(algorithms[i]);
    d.mean_ranks.push_back(means[i]);
  }
  std::size_t prev_last = 0;
  bool have = false;
  for (std::size_t a = 0; a < k; ++a) {
    std::size_t b = a;
    while (b + 1 < k && d.mean_ranks[b + 1] - d.mean_ranks[a] < d.critical_difference) ++b;
    if (b > a && (!have || b > prev_last)) {
      d.groups.emplace_back(a, b);
      prev_last = b;
      have = true;
    }
  }
  return d;
}

inline CDPlotData cd_plot_data(const RankMatrix& rk, double alpha = 0.05) {
  if (rk.scheme != RankScheme::per_row) throw ModeError("CD plot needs per-row Friedman ranks");
  auto mr = rk.mean_ranks();
  return cd_plot_data_from_means(rk.algorithms, std::vector<double>(mr.data(), mr.data() + mr.size()),
                                 rk.n(), alpha);
}

/// Standalone SVG critical-difference diagram.
inline std::string cd_plot_svg(const CDPlotData& d) {
  std::size_t k = d.order.size();
  const double width = 640, left = 60, right = 580, axis_y = 60;
  double scale = (right - left) / static_cast<double>(k - 1);
  auto xpos = [&](double r) { return left + (r - 1.0) * scale; };
  std::size_t half = (k + 1) / 2;
  double height = axis_y + 40 + 22.0 * static_cast<double>(half) + 12.0 * d.groups.size();
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << right << "\" y2=\"" << axis_y
    << "\" stroke=\"black\"/>\n";
  for (std::size_t r = 1; r <= k; ++r) {
    double x = xpos(static_cast<double>(r));
    s << "<line x1=\"" << x << "\" y1=\"" << axis_y - 5 << "\" x2=\"" << x << "\" y2=\"" << axis_y
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << x << "\" y=\"" << axis_y - 9 << "\" text-anchor=\"middle\">" << r
      << "</text>\n";
  }
  double cd_end = left + d.critical_difference * scale;
  s << "<line x1=\"" << left << "\" y1=\"20\" x2=\"" << cd_end << "\" y2=\"20\" stroke=\"black\" "
       "stroke-width=\"2\"/>\n";
  s << "<text x=\"" << (left + cd_end) / 2 << "\" y=\"14\" text-anchor=\"middle\">CD = "
    << d.critical_difference << "</text>\n";
  for (std::size_t t = 0; t < k; ++t) {
    double x = xpos(d.mean_ranks[t]);
    bool lhs = t < half;
    std::size_t row = lhs ? t : k - 1 - t;
    double y = axis_y + 30 + 22.0 * static_cast<double>(row) + 12.0 * d.groups.size();
    double tx = lhs ? left - 10 : right + 10;
    s << "<polyline points=\"" << x << ',' << axis_y << ' ' << x << ',' << y << ' ' << tx << ','
      << y << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << (lhs ? tx - 4 : tx + 4) << "\" y=\"" << y + 4 << "\" text-anchor=\""
      << (lhs ? "end" : "start") << "\">" << d.order[t] << "</text>\n";
  }
  for (std::size_t g = 0; g < d.groups.size(); ++g) {
    double y = axis_y + 14 + 12.0 * static_cast<double>(g);
    s << "<line x1=\"" << xpos(d.mean_ranks[d.groups[g].first]) - 3 << "\" y1=\"" << y
      << "\" x2=\"" << xpos(d.mean_ranks[d.groups[g].second]) + 3 << "\" y2=\"" << y
      << "\" stroke=\"black\" stroke-width=\"4\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace optistat
