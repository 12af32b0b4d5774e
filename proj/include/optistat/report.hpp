#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayes.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "family.hpp"
#include "multimeasure.hpp"
#include "omnibus.hpp"
#include "pairwise.hpp"
#include "posthoc.hpp"
#include "scoring.hpp"
#include "trend.hpp"

namespace optistat {

using json = nlohmann::ordered_json;

struct ShapiroReport {
  std::vector<std::string> labels;
  std::vector<ShapiroWilk> results;
  double alpha = 0.05;
};

using AnyReport = std::variant<PairwiseReport, OmnibusReport, HypothesisFamily, PageReport,
                               PosteriorSummary, IdpReport, BayesFriedmanReport, MultiMeasureReport,
                               ScoreTable, CDPlotData, ConfidenceCurve, ShapiroReport>;

enum class Format { json, markdown, latex };

inline Format parse_format(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "markdown" || s == "md") return Format::markdown;
  if (s == "latex" || s == "tex") return Format::latex;
  throw UnknownIdError("unknown format '" + s + "' (json, markdown, latex)");
}

namespace detail {

// p-values below the precision floor print as 0.
inline double shown_p(double p) { return underflows(p) ? 0.0 : p; }

inline std::string fmt(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string fmt_p(double p) { return fmt(shown_p(p), 4); }

inline json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline json jp(double p) { return shown_p(p); }

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<bool> bold;
  std::vector<std::string> notes;
};

inline json to_json(const PairwiseReport& r) {
  json stats = json::object();
  for (const auto& [k, v] : r.statistics) stats[k] = jnum(v);
  json j{{"test", r.test}, {"statistics", stats}};
  j["p_exact"] = r.p_exact ? jp(*r.p_exact) : json(nullptr);
  j["p_asymptotic"] = r.p_asymptotic ? jp(*r.p_asymptotic) : json(nullptr);
  j["alpha"] = r.alpha;
  j["rejected"] = r.rejected;
  if (r.degenerate) j["degenerate"] = true;
  return j;
}

inline Table to_table(const PairwiseReport& r) {
  Table t{r.test, {"statistic", "value"}};
  for (const auto& [k, v] : r.statistics) t.rows.push_back({k, fmt(v)});
  if (r.p_exact) t.rows.push_back({"p exact", fmt_p(*r.p_exact)});
  if (r.p_asymptotic) t.rows.push_back({"p asymptotic", fmt_p(*r.p_asymptotic)});
  t.bold.assign(t.rows.size(), false);
  for (std::size_t i = t.rows.size() - (r.p_exact ? 1 : 0) - (r.p_asymptotic ? 1 : 0); i < t.rows.size(); ++i)
    t.bold[i] = r.rejected;
  return t;
}

inline json to_json(const OmnibusReport& r) {
  json j{{"test", r.test}, {"statistics", {{"statistic", jnum(r.statistic)}}}};
  j["statistics"]["df"] = r.df;
  j["p_exact"] = nullptr;
  j["p_asymptotic"] = jp(r.p_value);
  j["alpha"] = r.alpha;
  j["rejected"] = r.rejected;
  j["underflow"] = r.underflow;
  if (!r.mean_ranks.empty()) {
    json mr = json::object();
    for (std::size_t i = 0; i < r.mean_ranks.size(); ++i) mr[r.algorithms[i]] = r.mean_ranks[i];
    j["mean_ranks"] = mr;
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline Table to_table(const OmnibusReport& r) {
  Table t{r.test, {"statistic", "df", "p-value"}};
  std::string df;
  for (std::size_t i = 0; i < r.df.size(); ++i) df += (i ? ", " : "") + fmt(r.df[i]);
  t.rows.push_back({fmt(r.statistic), df, fmt_p(r.p_value)});
  t.bold.push_back(r.rejected);
  if (!r.mean_ranks.empty()) {
    std::string s;
    for (std::size_t i = 0; i < r.mean_ranks.size(); ++i)
      s += (i ? "; " : "") + r.algorithms[i] + " " + fmt(r.mean_ranks[i], 4);
    t.notes.push_back("mean ranks: " + s);
  }
  for (const auto& n : r.notes) t.notes.push_back(n);
  return t;
}

inline json to_json(const HypothesisFamily& f) {
  json hs = json::array();
  for (const auto& h : f.hypotheses)
    hs.push_back({{"i", f.algorithms[h.i]}, {"j", f.algorithms[h.j]}, {"z", jnum(h.z)},
                  {"raw_p", jp(h.raw_p)}, {"adjusted_p", jp(h.adjusted_p)}, {"rejected", h.rejected}});
  json j{{"test", "posthoc"},
         {"method", f.method},
         {"mode", f.mode == FamilyMode::one_vs_all ? "one_vs_all" : "all_pairs"},
         {"alpha", f.alpha},
         {"hypotheses", hs}};
  if (f.degenerate) j["degenerate"] = true;
  if (!f.notes.empty()) j["notes"] = f.notes;
  return j;
}

inline Table to_table(const HypothesisFamily& f) {
  Table t{f.method, {"hypothesis", "statistic", "raw p", "adjusted p"}};
  for (const auto& h : f.hypotheses) {
    t.rows.push_back({f.algorithms[h.i] + " vs " + f.algorithms[h.j], fmt(h.z, 4), fmt_p(h.raw_p),
                      fmt_p(h.adjusted_p)});
    t.bold.push_back(h.rejected);
  }
  t.notes = f.notes;
  return t;
}

inline json to_json(const PageReport& r) {
  return {{"test", "page"},
          {"statistics", {{"L", r.L}, {"z", jnum(r.z)}, {"n", r.n}, {"c", r.c}}},
          {"p_exact", nullptr},
          {"p_asymptotic", jp(r.p_value)},
          {"alpha", r.alpha},
          {"rejected", r.p_value < r.alpha},
          {"first", r.first},
          {"second", r.second},
          {"direction", r.direction}};
}

inline Table to_table(const PageReport& r) {
  Table t{"page: " + r.first + " vs " + r.second, {"L", "z", "p-value", "faster"}};
  t.rows.push_back({fmt(r.L), fmt(r.z, 4), fmt_p(r.p_value), r.direction});
  t.bold.push_back(r.p_value < r.alpha);
  return t;
}

inline json to_json(const PosteriorSummary& s) {
  return {{"test", s.test},
          {"posterior", {{"left", s.p_left}, {"rope", s.p_rope}, {"right", s.p_right}}},
          {"rope", {s.rope.first, s.rope.second}},
          {"mc_samples", s.mc_samples},
          {"seed", s.seed}};
}

inline Table to_table(const PosteriorSummary& s) {
  Table t{s.test, {"left", "rope", "right"}};
  t.rows.push_back({fmt(s.p_left, 4), fmt(s.p_rope, 4), fmt(s.p_right, 4)});
  t.bold.push_back(false);
  t.notes.push_back("seed " + std::to_string(s.seed) + ", " + std::to_string(s.mc_samples) + " samples");
  return t;
}

inline json to_json(const IdpReport& r) {
  return {{"test", "idp_wilcoxon"},
          {"lower_bound", r.lower_bound},
          {"upper_bound", r.upper_bound},
          {"level", r.level},
          {"decision", decision_name(r.decision)},
          {"mc_samples", r.mc_samples},
          {"seed", r.seed}};
}

inline Table to_table(const IdpReport& r) {
  Table t{"idp_wilcoxon", {"lower bound", "upper bound", "decision"}};
  t.rows.push_back({fmt(r.lower_bound, 4), fmt(r.upper_bound, 4), decision_name(r.decision)});
  t.bold.push_back(r.decision == IdpDecision::first_wins || r.decision == IdpDecision::second_wins);
  t.notes.push_back("seed " + std::to_string(r.seed) + ", " + std::to_string(r.mc_samples) + " samples");
  return t;
}

inline json to_json(const BayesFriedmanReport& r) {
  json mr = json::object();
  for (std::size_t i = 0; i < r.mean_ranks.size(); ++i) mr[r.algorithms[i]] = r.mean_ranks[i];
  return {{"test", "bayes_friedman"},
          {"statistic", jnum(r.statistic)},
          {"rho", jnum(r.rho)},
          {"gamma", r.gamma},
          {"rejected", r.rejected},
          {"imprecise", r.imprecise},
          {"method", r.method == BayesFriedmanMethod::large_n ? "large_n" : "sampled"},
          {"mean_ranks", mr},
          {"mc_samples", r.mc_samples},
          {"seed", r.seed}};
}

inline Table to_table(const BayesFriedmanReport& r) {
  Table t{"bayes_friedman", {"algorithm", "mean rank"}};
  for (std::size_t i = 0; i < r.mean_ranks.size(); ++i) {
    t.rows.push_back({r.algorithms[i], fmt(r.mean_ranks[i], 4)});
    t.bold.push_back(false);
  }
  t.notes.push_back("statistic " + fmt(r.statistic) + ", rho " + fmt(r.rho) +
                    (r.rejected ? ", null rejected" : ", null retained"));
  return t;
}

inline json to_json(const MultiMeasureReport& r) {
  json counts = json::object();
  for (std::size_t p = 0; p < r.tally.counts.size(); ++p) counts[r.tally.pattern(p)] = r.tally.counts[p];
  json j{{"test", r.test}, {"counts", counts}, {"total", r.tally.total}, {"best_pattern", r.best_pattern}};
  if (r.test == "glrt_multimeasure") {
    j["lambda"] = r.lambda;
    j["p_value"] = jp(r.p_value);
    j["p_asymptotic"] = jp(r.p_asymptotic);
    j["resamples"] = r.resamples;
  } else {
    json probs = json::object();
    for (std::size_t p = 0; p < r.pattern_probabilities.size(); ++p)
      probs[r.tally.pattern(p)] = r.pattern_probabilities[p];
    j["probabilities"] = probs;
    j["mc_samples"] = r.resamples;
  }
  j["seed"] = r.seed;
  return j;
}

inline Table to_table(const MultiMeasureReport& r) {
  bool glrt = r.test == "glrt_multimeasure";
  Table t{r.test, glrt ? std::vector<std::string>{"pattern", "count"}
                       : std::vector<std::string>{"pattern", "count", "probability"}};
  for (std::size_t p = 0; p < r.tally.counts.size(); ++p) {
    std::vector<std::string> row{r.tally.pattern(p), fmt(r.tally.counts[p], 4)};
    if (!glrt) row.push_back(fmt(r.pattern_probabilities[p], 4));
    t.rows.push_back(row);
    t.bold.push_back(r.tally.pattern(p) == r.best_pattern);
  }
  if (glrt)
    t.notes.push_back("lambda " + fmt(r.lambda, 7) + ", p " + fmt_p(r.p_value) + " (bootstrap), " +
                      fmt_p(r.p_asymptotic) + " (chi-square)");
  t.notes.push_back("seed " + std::to_string(r.seed));
  return t;
}

inline json to_json(const ScoreTable& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"algorithm", r.algorithm}, {"SE", r.se}, {"SR", r.sr}, {"score1", r.score1},
                    {"score2", r.score2}, {"score", r.score}});
  return {{"test", "cec_scores"}, {"weights", s.weights}, {"rows", rows}};
}

inline Table to_table(const ScoreTable& s) {
  Table t{"cec_scores", {"algorithm", "SE", "SR", "Score1", "Score2", "Score"}};
  char b1[16], b2[16], b3[16];
  for (const auto& r : s.rows) {
    std::snprintf(b1, sizeof b1, "%.2f", r.score1);
    std::snprintf(b2, sizeof b2, "%.2f", r.score2);
    std::snprintf(b3, sizeof b3, "%.2f", r.score);
    t.rows.push_back({r.algorithm, fmt(r.se), fmt(r.sr), b1, b2, b3});
    t.bold.push_back(false);
  }
  if (!t.bold.empty()) t.bold[0] = true;
  return t;
}

inline json to_json(const CDPlotData& d) {
  json order = json::array();
  for (std::size_t i = 0; i < d.order.size(); ++i)
    order.push_back({{"algorithm", d.order[i]}, {"mean_rank", d.mean_ranks[i]}});
  json groups = json::array();
  for (auto [a, b] : d.groups) {
    json g = json::array();
    for (std::size_t i = a; i <= b; ++i) g.push_back(d.order[i]);
    groups.push_back(g);
  }
  return {{"test", "cd_plot"}, {"alpha", d.alpha}, {"n", d.n}, {"critical_difference", d.critical_difference},
          {"order", order}, {"groups", groups}};
}

inline Table to_table(const CDPlotData& d) {
  Table t{"critical difference", {"algorithm", "mean rank", "groups"}};
  for (std::size_t i = 0; i < d.order.size(); ++i) {
    std::string g;
    for (std::size_t q = 0; q < d.groups.size(); ++q)
      if (d.groups[q].first <= i && i <= d.groups[q].second) g += (g.empty() ? "" : ",") + std::to_string(q + 1);
    t.rows.push_back({d.order[i], fmt(d.mean_ranks[i], 4), g});
    t.bold.push_back(false);
  }
  t.notes.push_back("CD = " + fmt(d.critical_difference, 6));
  return t;
}

inline json to_json(const ConfidenceCurve& c) {
  json lv = json::array();
  for (const auto& l : c.levels) lv.push_back({{"alpha", l.alpha}, {"lower", l.lower}, {"upper", l.upper}});
  return {{"test", "confidence_curve"}, {"point_estimate", c.point_estimate}, {"levels", lv}};
}

inline Table to_table(const ConfidenceCurve& c) {
  Table t{"confidence curve", {"alpha", "lower", "upper"}};
  for (const auto& l : c.levels) {
    t.rows.push_back({fmt(l.alpha, 4), fmt(l.lower), fmt(l.upper)});
    t.bold.push_back(l.lower > 0 || l.upper < 0);
  }
  t.notes.push_back("point estimate " + fmt(c.point_estimate));
  return t;
}

inline json to_json(const ShapiroReport& s) {
  json rows = json::array();
  for (std::size_t i = 0; i < s.results.size(); ++i)
    rows.push_back({{"label", s.labels[i]}, {"W", s.results[i].w}, {"p_value", jp(s.results[i].p_value)},
                    {"rejected", s.results[i].p_value < s.alpha}});
  return {{"test", "shapiro_wilk"}, {"alpha", s.alpha}, {"results", rows}};
}

inline Table to_table(const ShapiroReport& s) {
  Table t{"shapiro_wilk", {"sample", "W", "p-value"}};
  for (std::size_t i = 0; i < s.results.size(); ++i) {
    t.rows.push_back({s.labels[i], fmt(s.results[i].w, 4), fmt_p(s.results[i].p_value)});
    t.bold.push_back(s.results[i].p_value < s.alpha);
  }
  return t;
}

inline std::string latex_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '_': case '%': case '&': case '#': case '$': case '{': case '}':
        out += '\\';
        out += c;
        break;
      case '<': out += "$<$"; break;
      case '>': out += "$>$"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string render_markdown(const Table& t) {
  std::ostringstream o;
  o << "### " << t.title << "\n\n|";
  for (const auto& h : t.header) o << ' ' << h << " |";
  o << "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) o << "---|";
  o << '\n';
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    o << '|';
    for (const auto& c : t.rows[r]) o << ' ' << (t.bold[r] ? "**" + c + "**" : c) << " |";
    o << '\n';
  }
  for (const auto& n : t.notes) o << "\n" << n << '\n';
  return o.str();
}

inline std::string render_latex(const Table& t) {
  std::ostringstream o;
  o << "\\begin{table}[ht]\n\\centering\n\\begin{tabular}{" << std::string(t.header.size(), 'l')
    << "}\n\\hline\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) o << (i ? " & " : "") << latex_escape(t.header[i]);
  o << " \\\\ \\hline\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      std::string cell = latex_escape(t.rows[r][c]);
      o << (c ? " & " : "") << (t.bold[r] ? "\\textbf{" + cell + "}" : cell);
    }
    o << " \\\\\n";
  }
  o << "\\hline\n\\end{tabular}\n\\caption{" << latex_escape(t.title);
  for (const auto& n : t.notes) o << ". " << latex_escape(n);
  o << "}\n\\end{table}\n";
  return o.str();
}

}  // namespace detail

inline json report_json(const AnyReport& r) {
  return std::visit([](const auto& x) { return detail::to_json(x); }, r);
}

/// Renders reports as one document. Rejected hypotheses are emphasised.
inline std::string emit_report(const std::vector<AnyReport>& reports, Format format) {
  if (reports.empty()) throw EmptyInputError("nothing to report");
  std::string out;
  if (format == Format::json) {
    if (reports.size() == 1) return report_json(reports[0]).dump(2) + "\n";
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(report_json(r));
    return arr.dump(2) + "\n";
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto t = std::visit([](const auto& x) { return detail::to_table(x); }, reports[i]);
    if (i) out += "\n";
    out += format == Format::markdown ? detail::render_markdown(t) : detail::render_latex(t);
  }
  return out;
}

inline std::string emit_report(const std::vector<AnyReport>& reports, const std::string& format) {
  return emit_report(reports, parse_format(format));
}

/// alpha,lower,upper rows of a confidence curve.
inline std::string curve_csv(const ConfidenceCurve& c) {
  std::ostringstream o;
  o << "alpha,lower,upper\n";
  char buf[96];
  for (const auto& l : c.levels) {
    std::snprintf(buf, sizeof buf, "%.6g,%.17g,%.17g\n", l.alpha, l.lower, l.upper);
    o << buf;
  }
  return o.str();
}

/// Posterior draws projected on the simplex triangle: x = rope + right/2,
/// y = right * sqrt(3)/2.
inline std::string ternary_csv(const PosteriorSummary& s) {
  std::ostringstream o;
  o << "left,rope,right,x,y\n";
  char buf[160];
  for (const auto& t : s.samples) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g\n", t[0], t[1], t[2], t[1] + t[2] / 2,
                  t[2] * std::sqrt(3.0) / 2);
    o << buf;
  }
  return o.str();
}

struct HeatmapCell {
  std::string row, col, winner;
  double probability = 0;
};

inline std::string heatmap_json(const std::vector<std::string>& algorithms,
                                const std::vector<HeatmapCell>& cells) {
  json j{{"algorithms", algorithms}, {"cells", json::array()}};
  for (const auto& c : cells)
    j["cells"].push_back({{"row", c.row}, {"col", c.col}, {"winner", c.winner}, {"probability", c.probability}});
  return j.dump(2) + "\n";
}

}  // namespace optistat
