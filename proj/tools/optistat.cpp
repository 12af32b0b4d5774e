#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <optistat/optistat.hpp>

using namespace optistat;

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string format = "json";
  std::string out;
  std::string seed = "42";
  unsigned threads = 1;
  double alpha = 0.05;
  std::size_t mc_samples = 100000;
  std::string rope = "-0.01,0.01";
  std::string method = "holland";
  std::string control;
  std::string algs;
  std::string test;
  std::string rank = "friedman";
  std::string plot_dir;
  std::string counts;
  std::string weights;
  double gamma = 0.05;
  double prior_strength = 1.0;
  double optimum = 0.0;
  double tolerance = 1e-8;
  std::size_t resamples = 10000;
  bool maximise = false;
  bool imprecise = false;
};

// Validation failure in the command line itself; exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = detail::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const std::string& flag) {
  std::vector<double> out;
  for (const auto& f : split_list(s)) {
    auto v = detail::parse_double(f);
    if (!v) throw UsageError(flag + ": '" + f + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

class Runner {
 public:
  explicit Runner(const Options& o) : o_(o) {}

  void validate() {
    format_ = parse_format(o_.format);
    if (o_.seed == "random") {
      seed_ = std::random_device{}();
    } else {
      auto v = detail::parse_int(o_.seed);
      if (!v || *v < 0) throw UsageError("--seed: expected a non-negative integer or 'random'");
      seed_ = static_cast<std::uint64_t>(*v);
    }
    auto r = parse_numbers(o_.rope, "--rope");
    if (r.size() != 2) throw UsageError("--rope: expected 'lower,upper'");
    cfg_.alpha = o_.alpha;
    cfg_.seed = seed_;
    cfg_.mc_samples = o_.mc_samples;
    cfg_.rope = {r[0], r[1]};
    cfg_.prior_strength = o_.prior_strength;
    cfg_.threads = o_.threads;
    try {
      cfg_.validate();
    } catch (const ValueError& e) {
      throw UsageError(std::string("--") + flag_for(e.what()) + ": " + e.what());
    }
  }

  std::string run(const std::string& cmd) {
    if (cmd == "check") return check();
    if (cmd == "pairwise") return pairwise();
    if (cmd == "omnibus") return omnibus();
    if (cmd == "posthoc") return posthoc();
    if (cmd == "page") return page();
    if (cmd == "ci") return ci();
    if (cmd == "curve") return curve();
    if (cmd == "bayes-sign" || cmd == "bayes-signed-rank") return bayes_pair(cmd);
    if (cmd == "bayes-friedman") return bayes_friedman_cmd();
    if (cmd == "idp") return idp();
    if (cmd == "mm-glrt" || cmd == "mm-bayes") return multimeasure(cmd);
    if (cmd == "hotelling") return hotelling();
    if (cmd == "score") return score();
    if (cmd == "report") return report();
    throw UsageError("unknown subcommand '" + cmd + "'");
  }

  bool stochastic(const std::string& cmd) const {
    return cmd == "bayes-sign" || cmd == "bayes-signed-rank" || cmd == "bayes-friedman" || cmd == "idp" ||
           cmd == "mm-glrt" || cmd == "mm-bayes" || cmd == "report";
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static const char* flag_for(const std::string& msg) {
    if (msg.find("alpha") != std::string::npos) return "alpha";
    if (msg.find("mc_samples") != std::string::npos) return "mc-samples";
    if (msg.find("rope") != std::string::npos) return "rope";
    if (msg.find("prior") != std::string::npos) return "prior-strength";
    if (msg.find("threads") != std::string::npos) return "threads";
    return "config";
  }

  std::string emit(const std::vector<AnyReport>& r) const { return emit_report(r, format_); }

  const std::string& single_input() const {
    if (o_.inputs.size() != 1) throw UsageError("--input: exactly one file is required");
    return o_.inputs[0];
  }

  ResultsMatrix matrix() const {
    auto m = load_results_matrix(single_input(), o_.maximise ? Direction::maximise : Direction::minimise);
    if (o_.algs.empty()) return m;
    try {
      return m.select(split_list(o_.algs));
    } catch (const optistat::Error& e) {
      throw UsageError(std::string("--algs: ") + e.what());
    }
  }

  std::pair<std::string, std::string> two_algs() const {
    auto a = split_list(o_.algs);
    if (a.size() != 2) throw UsageError("--algs: expected two comma-separated algorithm ids");
    return {a[0], a[1]};
  }

  std::pair<std::vector<double>, std::vector<double>> pair_columns() const {
    auto m = matrix();
    auto [a, b] = two_algs();
    return {m.column(a), m.column(b)};
  }

  void write_plot(const std::string& name, const std::string& content) const {
    if (o_.plot_dir.empty()) return;
    std::string path = o_.plot_dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("--plot-dir: cannot write '" + path + "'");
    f << content;
  }

  RankMatrix ranks(const ResultsMatrix& m) const {
    if (o_.rank == "friedman") return friedman_ranks(m);
    if (o_.rank == "aligned") return aligned_ranks(m);
    if (o_.rank == "quade") return quade_weighted_ranks(m);
    throw UsageError("--rank: expected friedman, aligned or quade");
  }

  std::string check() {
    auto m = matrix();
    ShapiroReport s;
    s.alpha = o_.alpha;
    for (std::size_t j = 0; j < m.k(); ++j) {
      auto col = m.column(j);
      s.labels.push_back(m.algorithms()[j]);
      s.results.push_back(shapiro_wilk(col));
    }
    std::vector<AnyReport> out{s};
    try {
      out.emplace_back(levene_test(m, o_.alpha));
    } catch (const DegenerateError&) {
    }
    return emit(out);
  }

  std::string pairwise() {
    auto [x, y] = pair_columns();
    std::string t = o_.test.empty() ? "signed-rank" : o_.test;
    if (t == "sign") return emit({sign_test(x, y, o_.alpha)});
    if (t == "signed-rank" || t == "wilcoxon") return emit({wilcoxon_signed_rank(x, y, o_.alpha)});
    if (t == "rank-sum") return emit({wilcoxon_rank_sum(x, y, o_.alpha)});
    if (t == "t") return emit({t_test_paired(x, y, o_.alpha)});
    throw UsageError("--test: expected sign, signed-rank, rank-sum or t");
  }

  std::string omnibus() {
    auto m = matrix();
    std::string t = o_.test.empty() ? "friedman" : o_.test;
    if (t == "friedman") return emit({friedman_test(m, FriedmanVariant::chi_square, o_.alpha)});
    if (t == "iman-davenport") return emit({friedman_test(m, FriedmanVariant::iman_davenport, o_.alpha)});
    if (t == "aligned") return emit({friedman_test(m, FriedmanVariant::aligned, o_.alpha)});
    if (t == "quade") return emit({friedman_test(m, FriedmanVariant::quade, o_.alpha)});
    if (t == "anova") return emit({anova_oneway(m, o_.alpha)});
    if (t == "levene") return emit({levene_test(m, o_.alpha)});
    if (t == "multiple-sign") {
      if (o_.control.empty()) throw UsageError("--control: required by the multiple sign test");
      return emit({multiple_sign_test(m, o_.control, o_.alpha)});
    }
    throw UsageError("--test: expected friedman, iman-davenport, aligned, quade, anova, levene or multiple-sign");
  }

  HypothesisFamily family(const ResultsMatrix& m) const {
    auto rk = ranks(m);
    bool vs_control = !o_.control.empty();
    auto mode = vs_control ? FamilyMode::one_vs_all : FamilyMode::all_pairs;
    std::optional<std::string> ctl;
    if (vs_control) ctl = o_.control;
    auto f = pairwise_raw_pvalues(rk, mode, ctl, o_.alpha);
    const std::string& meth = o_.method;
    if (meth == "shaffer") return shaffer_adjust(f, false);
    if (meth == "shaffer-dynamic") return shaffer_adjust(f, true);
    if (meth == "bergmann-hommel") return bergmann_hommel(f);
    std::string name = meth;
    for (auto& ch : name)
      if (ch == '-') ch = '_';
    AdjustMethod am;
    try {
      am = parse_adjust_method(name);
    } catch (const UnknownIdError&) {
      throw UsageError("--method: unknown adjustment '" + meth + "'");
    }
    return adjust_pvalues(f, am);
  }

  std::string posthoc() {
    auto m = matrix();
    auto f = family(m);
    std::vector<AnyReport> out{f};
    if (o_.rank == "friedman" && (o_.alpha == 0.05 || o_.alpha == 0.10)) {
      auto cd = cd_plot_data(friedman_ranks(m), o_.alpha);
      write_plot("cd.svg", cd_plot_svg(cd));
      write_plot("cd.json", report_json(cd).dump(2) + "\n");
    }
    return emit(out);
  }

  std::string page() {
    if (o_.inputs.size() != 2) throw UsageError("--input: page needs two convergence files");
    auto names = split_list(o_.algs);
    if (names.empty()) names = {o_.inputs[0], o_.inputs[1]};
    if (names.size() != 2) throw UsageError("--algs: expected two comma-separated algorithm ids");
    auto a = load_convergence_table(o_.inputs[0], names[0], o_.optimum, o_.tolerance);
    auto b = load_convergence_table(o_.inputs[1], names[1], o_.optimum, o_.tolerance);
    return emit({page_test(a, b, o_.alpha)});
  }

  std::string ci() {
    auto [x, y] = pair_columns();
    auto [lo, hi] = np_confidence_interval(x, y, o_.alpha);
    ConfidenceCurve c;
    c.point_estimate = confidence_curve(x, y).point_estimate;
    c.levels.push_back({o_.alpha, lo, hi});
    return emit({c});
  }

  std::string curve() {
    auto [x, y] = pair_columns();
    auto c = confidence_curve(x, y);
    write_plot("curve.csv", curve_csv(c));
    return emit({c});
  }

  std::string bayes_pair(const std::string& cmd) {
    auto [x, y] = pair_columns();
    auto s = cmd == "bayes-sign" ? bayes_sign(x, y, cfg_) : bayes_signed_rank(x, y, cfg_);
    write_plot("ternary.csv", ternary_csv(s));
    return emit({s});
  }

  std::string bayes_friedman_cmd() {
    auto m = matrix();
    return emit({bayes_friedman(m, o_.gamma, o_.imprecise, cfg_)});
  }

  std::string idp() {
    auto [x, y] = pair_columns();
    return emit({idp_wilcoxon(x, y, cfg_, 1 - o_.alpha)});
  }

  DominanceTally tally() const {
    if (!o_.counts.empty()) {
      if (!o_.inputs.empty()) throw UsageError("--counts: give either counts or inputs, not both");
      auto c = parse_numbers(o_.counts, "--counts");
      std::size_t m = 0;
      while ((std::size_t{1} << m) < c.size()) ++m;
      if ((std::size_t{1} << m) != c.size()) throw UsageError("--counts: expected 2^m values");
      return DominanceTally::from_counts(m, c);
    }
    auto [a, b] = measure_pair();
    return dominance_tally(a, b);
  }

  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> measure_pair() const {
    if (o_.inputs.size() != 2) throw UsageError("--input: two measure files are required");
    auto a = load_results_matrix(o_.inputs[0]);
    auto b = load_results_matrix(o_.inputs[1]);
    if (a.benchmarks() != b.benchmarks() || a.algorithms() != b.algorithms())
      throw ShapeError("measure files differ in benchmarks or measures");
    return {a.values(), b.values()};
  }

  std::string multimeasure(const std::string& cmd) {
    auto t = tally();
    if (cmd == "mm-glrt") return emit({glrt_multimeasure(t, cfg_, o_.resamples)});
    return emit({bayes_multimeasure(t, cfg_)});
  }

  std::string hotelling() {
    auto [a, b] = measure_pair();
    std::vector<AnyReport> out{hotelling_t2(a, b, o_.alpha)};
    ShapiroReport s;
    s.alpha = o_.alpha;
    Eigen::MatrixXd d = a - b;
    auto names = load_results_matrix(o_.inputs[0]).algorithms();
    for (Eigen::Index c = 0; c < d.cols(); ++c) {
      std::vector<double> col(d.col(c).data(), d.col(c).data() + d.rows());
      s.labels.push_back(names[static_cast<std::size_t>(c)] + " (univariate check)");
      s.results.push_back(shapiro_wilk(col));
    }
    out.emplace_back(s);
    return emit(out);
  }

  std::string score() {
    if (o_.inputs.empty()) throw UsageError("--input: at least one results file is required");
    std::vector<ResultsMatrix> ms;
    for (const auto& p : o_.inputs)
      ms.push_back(load_results_matrix(p, o_.maximise ? Direction::maximise : Direction::minimise));
    std::vector<double> w;
    if (!o_.weights.empty()) {
      w = parse_numbers(o_.weights, "--weights");
    } else if (ms.size() == default_cec_weights().size()) {
      w = default_cec_weights();
    } else {
      w.assign(ms.size(), 1.0 / static_cast<double>(ms.size()));
    }
    return emit({cec_scores(ms, w)});
  }

  std::string report() {
    auto m = matrix();
    std::vector<AnyReport> out;
    out.emplace_back(friedman_test(m, FriedmanVariant::chi_square, o_.alpha));
    out.emplace_back(friedman_test(m, FriedmanVariant::iman_davenport, o_.alpha));
    auto rk = friedman_ranks(m);
    auto mr = rk.mean_ranks();
    std::string ctl = o_.control;
    if (ctl.empty()) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < m.k(); ++j)
        if (mr[j] < mr[best]) best = j;
      ctl = m.algorithms()[best];
    }
    auto f = pairwise_raw_pvalues(rk, FamilyMode::one_vs_all, ctl, o_.alpha);
    AdjustMethod am = AdjustMethod::holland;
    if (!o_.method.empty()) {
      std::string name = o_.method;
      for (auto& ch : name)
        if (ch == '-') ch = '_';
      am = parse_adjust_method(name);
    }
    out.emplace_back(adjust_pvalues(f, am));
    if (o_.alpha == 0.05 || o_.alpha == 0.10) {
      auto cd = cd_plot_data(rk, o_.alpha);
      write_plot("cd.svg", cd_plot_svg(cd));
      out.emplace_back(cd);
    }
    if (!o_.plot_dir.empty()) {
      std::vector<HeatmapCell> cells;
      const auto& algs = m.algorithms();
      for (std::size_t i = 0; i < m.k(); ++i)
        for (std::size_t j = 0; j < m.k(); ++j) {
          if (i == j) continue;
          TestConfig c = cfg_;
          c.seed = cfg_.seed + i * m.k() + j;
          auto s = bayes_sign(m.column(i), m.column(j), c);
          HeatmapCell cell{algs[i], algs[j], "rope", s.p_rope};
          if (s.p_left > s.p_rope && s.p_left >= s.p_right) cell = {algs[i], algs[j], algs[i], s.p_left};
          else if (s.p_right > s.p_rope && s.p_right > s.p_left) cell = {algs[i], algs[j], algs[j], s.p_right};
          cells.push_back(cell);
        }
      write_plot("heatmap.json", heatmap_json(algs, cells));
    }
    return emit(out);
  }

  const Options& o_;
  Format format_ = Format::json;
  std::uint64_t seed_ = 42;
  TestConfig cfg_;
};

void add_common(CLI::App* s, Options& o) {
  s->add_option("--input,-i", o.inputs, "input CSV file(s)");
  s->add_option("--format,-f", o.format, "json, markdown or latex");
  s->add_option("--out,-o", o.out, "write the document here instead of stdout");
  s->add_option("--seed", o.seed, "integer seed or 'random'");
  s->add_option("--threads", o.threads, "Monte Carlo worker threads");
  s->add_option("--alpha", o.alpha, "significance level");
  s->add_option("--mc-samples", o.mc_samples, "Monte Carlo draws");
  s->add_option("--rope", o.rope, "region of practical equivalence 'lower,upper'");
  s->add_option("--method", o.method, "post-hoc adjustment");
  s->add_option("--control", o.control, "control algorithm");
  s->add_option("--algs", o.algs, "algorithm ids: two for paired tests, a subset otherwise");
  s->add_option("--test", o.test, "test variant");
  s->add_option("--rank", o.rank, "friedman, aligned or quade ranking for post-hoc");
  s->add_option("--plot-dir", o.plot_dir, "directory for plot data files");
  s->add_option("--counts", o.counts, "dominance tally counts, 2^m values");
  s->add_option("--weights", o.weights, "per-dimension score weights");
  s->add_option("--gamma", o.gamma, "Bayesian Friedman credibility level");
  s->add_option("--prior-strength", o.prior_strength, "Dirichlet prior strength");
  s->add_option("--optimum", o.optimum, "known optimum for convergence files");
  s->add_option("--tolerance", o.tolerance, "distance to the optimum counted as reached");
  s->add_option("--resamples", o.resamples, "GLRT bootstrap resamples");
  s->add_flag("--maximise", o.maximise, "larger values are better");
  s->add_flag("--imprecise", o.imprecise, "imprecise prior for the Bayesian Friedman test");
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical comparison of optimisation algorithms"};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> cmds[] = {
      {"check", "normality and homoscedasticity checks"},
      {"pairwise", "sign, signed-rank, rank-sum or paired t test"},
      {"omnibus", "Friedman family, ANOVA, Levene or multiple sign test"},
      {"posthoc", "adjusted p-values and critical-difference data"},
      {"page", "Page trend test on two convergence tables"},
      {"ci", "non-parametric confidence interval"},
      {"curve", "confidence curve"},
      {"bayes-sign", "Bayesian sign test"},
      {"bayes-signed-rank", "Bayesian signed-rank test"},
      {"bayes-friedman", "Bayesian Friedman test"},
      {"idp", "imprecise Dirichlet process Wilcoxon test"},
      {"mm-glrt", "multi-measure likelihood-ratio test"},
      {"mm-bayes", "Bayesian multi-measure test"},
      {"hotelling", "paired Hotelling T^2 test"},
      {"score", "CEC'17 competition scores"},
      {"report", "omnibus, post-hoc and CD summary"}};
  for (const auto& [c, d] : cmds) add_common(app.add_subcommand(c, d), o);
  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    std::cerr << "error: unknown subcommand '" << argv[1] << "'\n";
    return 2;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  }
  std::string cmd = app.get_subcommands().front()->get_name();

  Runner runner(o);
  try {
    runner.validate();
    std::string doc = runner.run(cmd);
    if (runner.stochastic(cmd)) std::cerr << "seed: " << runner.seed() << "\n";
    if (o.out.empty()) {
      std::cout << doc;
    } else {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) throw UsageError("--out: cannot write '" + o.out + "'");
      f << doc;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const optistat::Error& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 2;
  }
  return 0;
}
