#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "detail/csv.hpp"
#include "errors.hpp"

namespace optistat {

enum class Direction { minimise, maximise };

/// n benchmarks x k algorithms of aggregated scores.
class ResultsMatrix {
 public:
  ResultsMatrix() = default;

  ResultsMatrix(std::vector<std::string> algorithms, std::vector<std::string> benchmarks,
                Eigen::MatrixXd values, Direction direction = Direction::minimise)
      : algorithms_(std::move(algorithms)),
        benchmarks_(std::move(benchmarks)),
        values_(std::move(values)),
        direction_(direction) {
    if (algorithms_.empty() || benchmarks_.empty())
      throw SizeError("results matrix needs at least one algorithm and one benchmark");
    if (static_cast<std::size_t>(values_.rows()) != benchmarks_.size() ||
        static_cast<std::size_t>(values_.cols()) != algorithms_.size())
      throw ShapeError("results matrix shape does not match its labels");
    check_unique(algorithms_, "algorithm");
    check_unique(benchmarks_, "benchmark");
    for (Eigen::Index i = 0; i < values_.rows(); ++i)
      for (Eigen::Index j = 0; j < values_.cols(); ++j)
        if (!std::isfinite(values_(i, j)))
          throw ValueError("non-finite value at benchmark '" + benchmarks_[i] + "', algorithm '" +
                           algorithms_[j] + "'");
  }

  std::size_t n() const { return benchmarks_.size(); }
  std::size_t k() const { return algorithms_.size(); }
  const std::vector<std::string>& algorithms() const { return algorithms_; }
  const std::vector<std::string>& benchmarks() const { return benchmarks_; }
  Direction direction() const { return direction_; }

  /// Values as supplied.
  const Eigen::MatrixXd& values() const { return values_; }

  /// Lower-is-better view: negated when the direction is maximise.
  Eigen::MatrixXd scores() const {
    return direction_ == Direction::maximise ? Eigen::MatrixXd(-values_) : values_;
  }

  std::size_t index_of(const std::string& algorithm) const {
    auto it = std::find(algorithms_.begin(), algorithms_.end(), algorithm);
    if (it == algorithms_.end()) throw UnknownIdError("unknown algorithm '" + algorithm + "'");
    return static_cast<std::size_t>(it - algorithms_.begin());
  }

  /// Lower-is-better column.
  std::vector<double> column(const std::string& algorithm) const {
    return column(index_of(algorithm));
  }
  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n());
    double sign = direction_ == Direction::maximise ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n(); ++i) out[i] = sign * values_(i, j);
    return out;
  }

  /// Sub-matrix restricted to the given algorithms, in the given order.
  ResultsMatrix select(const std::vector<std::string>& algorithms) const {
    Eigen::MatrixXd v(n(), algorithms.size());
    for (std::size_t c = 0; c < algorithms.size(); ++c) v.col(c) = values_.col(index_of(algorithms[c]));
    return ResultsMatrix(algorithms, benchmarks_, std::move(v), direction_);
  }

  friend bool operator==(const ResultsMatrix& a, const ResultsMatrix& b) {
    return a.algorithms_ == b.algorithms_ && a.benchmarks_ == b.benchmarks_ &&
           a.direction_ == b.direction_ && a.values_ == b.values_;
  }

 private:
  static void check_unique(const std::vector<std::string>& ids, const char* what) {
    std::set<std::string> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second)
        throw DuplicateIdError(std::string("duplicate ") + what + " id '" + id + "'");
  }

  std::vector<std::string> algorithms_;
  std::vector<std::string> benchmarks_;
  Eigen::MatrixXd values_;
  Direction direction_ = Direction::minimise;
};

struct RunRecord {
  std::string algorithm;
  std::string benchmark;
  long long run = 1;
  double value = 0;
};

class RunTable {
 public:
  RunTable() = default;
  explicit RunTable(std::vector<RunRecord> records) : records_(std::move(records)) {
    std::set<std::tuple<std::string, std::string, long long>> seen;
    for (const auto& r : records_) {
      if (r.run < 1) throw ValueError("run index must be >= 1 (" + r.algorithm + ", " + r.benchmark + ")");
      if (!std::isfinite(r.value))
        throw ValueError("non-finite value for (" + r.algorithm + ", " + r.benchmark + ", run " +
                         std::to_string(r.run) + ")");
      if (!seen.emplace(r.algorithm, r.benchmark, r.run).second)
        throw DuplicateIdError("duplicate record (" + r.algorithm + ", " + r.benchmark + ", run " +
                               std::to_string(r.run) + ")");
    }
  }
  const std::vector<RunRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<RunRecord> records_;
};

/// Best-so-far values of one algorithm at c equidistant cut points.
struct ConvergenceTable {
  std::string algorithm;
  std::vector<std::string> benchmarks;
  Eigen::MatrixXd cut_values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> optimum_reached;

  std::size_t n() const { return benchmarks.size(); }
  std::size_t c() const { return static_cast<std::size_t>(cut_values.cols()); }

  /// 1-based index of the first cut where the optimum is reached, if any.
  std::optional<std::size_t> first_reached(std::size_t row) const {
    for (std::size_t j = 0; j < c(); ++j)
      if (optimum_reached(row, j)) return j + 1;
    return std::nullopt;
  }
};

inline ConvergenceTable make_convergence_table(std::string algorithm,
                                               std::vector<std::string> benchmarks,
                                               Eigen::MatrixXd cut_values, double optimum = 0.0,
                                               double tolerance = 1e-8) {
  if (static_cast<std::size_t>(cut_values.rows()) != benchmarks.size())
    throw ShapeError("convergence table rows do not match benchmark ids");
  if (cut_values.cols() < 3) throw SizeError("convergence table needs at least 3 cut points");
  ConvergenceTable t{std::move(algorithm), std::move(benchmarks), std::move(cut_values), {}};
  t.optimum_reached.resize(t.cut_values.rows(), t.cut_values.cols());
  for (Eigen::Index i = 0; i < t.cut_values.rows(); ++i) {
    bool reached = false;
    for (Eigen::Index j = 0; j < t.cut_values.cols(); ++j) {
      double v = t.cut_values(i, j);
      if (!std::isfinite(v))
        throw ValueError("non-finite value at benchmark '" + t.benchmarks[i] + "', cut " +
                         std::to_string(j + 1));
      if (j > 0 && v > t.cut_values(i, j - 1))
        throw MonotonicityError("best-so-far increases at benchmark '" + t.benchmarks[i] +
                                "', cut " + std::to_string(j + 1));
      reached = reached || (v - optimum <= tolerance);
      t.optimum_reached(i, j) = reached;
    }
  }
  return t;
}

struct TestConfig {
  double alpha = 0.05;
  std::uint64_t seed = 42;
  std::size_t mc_samples = 100000;
  std::pair<double, double> rope{-0.01, 0.01};
  double prior_strength = 1.0;
  double z0 = 0.0;
  unsigned threads = 1;

  void validate() const {
    if (!(alpha > 0 && alpha < 1)) throw ValueError("alpha must lie in (0, 1)");
    if (mc_samples < 1000) throw ValueError("mc_samples must be at least 1000");
    if (!(rope.first <= 0 && 0 <= rope.second)) throw ValueError("rope must satisfy lower <= 0 <= upper");
    if (!(prior_strength > 0)) throw ValueError("prior strength must be positive");
    if (!std::isfinite(z0)) throw ValueError("pseudo observation must be finite");
    if (threads < 1) throw ValueError("threads must be at least 1");
  }
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

// Reads non-blank lines, remembering their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (no == 1) strip_bom(line);
    if (!blank(line)) out.emplace_back(no, line);
  }
  return out;
}

inline double parse_cell(const std::string& field, std::size_t line, std::size_t col,
                         const std::string& row_id, const std::string& col_id) {
  std::string where = "line " + std::to_string(line) + ", column " + std::to_string(col) +
                      " (row '" + row_id + "', column '" + col_id + "')";
  if (field.empty()) throw ParseError("missing cell at " + where);
  auto v = parse_double(field);
  if (!v) throw ParseError("cannot parse '" + field + "' at " + where);
  if (!std::isfinite(*v)) throw ValueError("non-finite value '" + field + "' at " + where);
  return *v;
}

}  // namespace detail

inline ResultsMatrix load_results_matrix(std::istream& in, Direction direction = Direction::minimise) {
  auto lines = detail::read_lines(in);
  if (lines.empty()) throw EmptyInputError("results file is empty");
  auto header = detail::split_fields(lines[0].second);
  if (header.size() < 3) throw ParseError("header needs a benchmark column and at least 2 algorithms");
  std::vector<std::string> algorithms(header.begin() + 1, header.end());
  for (std::size_t j = 0; j < algorithms.size(); ++j)
    if (algorithms[j].empty())
      throw ParseError("empty algorithm name in header column " + std::to_string(j + 2));
  if (lines.size() < 3) throw SizeError("results file needs at least 2 benchmark rows");

  std::vector<std::string> benchmarks;
  Eigen::MatrixXd values(lines.size() - 1, algorithms.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto [no, text] = lines[r];
    auto fields = detail::split_fields(text);
    if (fields[0].empty()) throw ParseError("missing benchmark id at line " + std::to_string(no));
    if (fields.size() > header.size())
      throw ParseError("too many cells at line " + std::to_string(no));
    benchmarks.push_back(fields[0]);
    for (std::size_t j = 0; j < algorithms.size(); ++j) {
      std::string field = j + 1 < fields.size() ? fields[j + 1] : std::string();
      values(r - 1, j) = detail::parse_cell(field, no, j + 2, fields[0], algorithms[j]);
    }
  }
  return ResultsMatrix(std::move(algorithms), std::move(benchmarks), std::move(values), direction);
}

inline ResultsMatrix load_results_matrix(const std::string& path,
                                         Direction direction = Direction::minimise) {
  auto in = detail::open_input(path);
  return load_results_matrix(in, direction);
}

/// Writes the canonical CSV layout with 17 significant digits.
inline void write_results_matrix(std::ostream& out, const ResultsMatrix& m) {
  out << "benchmark";
  for (const auto& a : m.algorithms()) out << ',' << a;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.n(); ++i) {
    out << m.benchmarks()[i];
    for (std::size_t j = 0; j < m.k(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values()(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

inline RunTable load_run_table(std::istream& in) {
  auto lines = detail::read_lines(in);
  if (lines.empty()) throw EmptyInputError("run file is empty");
  auto header = detail::split_fields(lines[0].second);
  if (header != std::vector<std::string>{"algorithm", "benchmark", "run", "value"})
    throw ParseError("run file header must be algorithm,benchmark,run,value");
  if (lines.size() == 1) throw EmptyInputError("run file has no data rows");
  std::vector<RunRecord> records;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto [no, text] = lines[r];
    auto f = detail::split_fields(text);
    if (f.size() != 4 || f[0].empty() || f[1].empty())
      throw ParseError("line " + std::to_string(no) + " needs 4 cells");
    auto run = detail::parse_int(f[2]);
    if (!run) throw ParseError("bad run index '" + f[2] + "' at line " + std::to_string(no));
    double v = detail::parse_cell(f[3], no, 4, f[0] + "/" + f[1], "value");
    records.push_back({f[0], f[1], *run, v});
  }
  return RunTable(std::move(records));
}

inline RunTable load_run_table(const std::string& path) {
  auto in = detail::open_input(path);
  return load_run_table(in);
}

enum class Aggregate { mean, median };

inline ResultsMatrix aggregate_runs(const RunTable& t, Aggregate stat,
                                    Direction direction = Direction::minimise) {
  if (t.size() == 0) throw EmptyInputError("run table is empty");
  std::vector<std::string> algorithms, benchmarks;
  std::map<std::string, std::size_t> alg_index, bench_index;
  for (const auto& r : t.records()) {
    if (alg_index.emplace(r.algorithm, algorithms.size()).second) algorithms.push_back(r.algorithm);
    if (bench_index.emplace(r.benchmark, benchmarks.size()).second) benchmarks.push_back(r.benchmark);
  }
  std::vector<std::vector<std::vector<double>>> cells(
      benchmarks.size(), std::vector<std::vector<double>>(algorithms.size()));
  for (const auto& r : t.records())
    cells[bench_index[r.benchmark]][alg_index[r.algorithm]].push_back(r.value);

  std::string missing;
  Eigen::MatrixXd values(benchmarks.size(), algorithms.size());
  for (std::size_t i = 0; i < benchmarks.size(); ++i)
    for (std::size_t j = 0; j < algorithms.size(); ++j) {
      auto& v = cells[i][j];
      if (v.empty()) {
        missing += (missing.empty() ? "" : ", ") + std::string("(") + algorithms[j] + ", " +
                   benchmarks[i] + ")";
        continue;
      }
      if (stat == Aggregate::mean) {
        double s = 0;
        for (double x : v) s += x;
        values(i, j) = s / static_cast<double>(v.size());
      } else {
        std::sort(v.begin(), v.end());
        std::size_t h = v.size() / 2;
        values(i, j) = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
      }
    }
  if (!missing.empty()) throw MissingCellError("missing (algorithm, benchmark) pairs: " + missing);
  return ResultsMatrix(std::move(algorithms), std::move(benchmarks), std::move(values), direction);
}

/// Wide layout: benchmark,c1,...,cC.
inline ConvergenceTable load_convergence_table(std::istream& in, std::string algorithm,
                                               double optimum = 0.0, double tolerance = 1e-8) {
  auto lines = detail::read_lines(in);
  if (lines.empty()) throw EmptyInputError("convergence file is empty");
  auto header = detail::split_fields(lines[0].second);
  if (header.size() < 4) throw SizeError("convergence file needs at least 3 cut columns");
  std::size_t c = header.size() - 1;
  if (lines.size() == 1) throw EmptyInputError("convergence file has no data rows");
  std::vector<std::string> benchmarks;
  Eigen::MatrixXd values(lines.size() - 1, c);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto [no, text] = lines[r];
    auto f = detail::split_fields(text);
    if (f.size() > header.size()) throw ParseError("too many cells at line " + std::to_string(no));
    benchmarks.push_back(f[0]);
    for (std::size_t j = 0; j < c; ++j)
      values(r - 1, j) = detail::parse_cell(j + 1 < f.size() ? f[j + 1] : std::string(), no, j + 2,
                                            f[0], header[j + 1]);
  }
  std::set<std::string> seen;
  for (const auto& b : benchmarks)
    if (!seen.insert(b).second) throw DuplicateIdError("duplicate benchmark id '" + b + "'");
  return make_convergence_table(std::move(algorithm), std::move(benchmarks), std::move(values),
                                optimum, tolerance);
}

inline ConvergenceTable load_convergence_table(const std::string& path, std::string algorithm,
                                               double optimum = 0.0, double tolerance = 1e-8) {
  auto in = detail::open_input(path);
  return load_convergence_table(in, std::move(algorithm), optimum, tolerance);
}

}  // namespace optistat
