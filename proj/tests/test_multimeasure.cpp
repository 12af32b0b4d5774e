#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <optistat/multimeasure.hpp>
#include <optistat/pairwise.hpp>

using namespace optistat;

namespace {

TestConfig config(std::size_t samples = 20000, double s = 1.0) {
  TestConfig c;
  c.mc_samples = samples;
  c.prior_strength = s;
  return c;
}

Eigen::MatrixXd wave(int n, int m, double phase) {
  Eigen::MatrixXd a(n, m);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < m; ++c) a(i, c) = std::sin(1.7 * i + 0.9 * c + phase) + 0.3 * std::cos(2.3 * i * (c + 1));
  return a;
}

}  // namespace

TEST(Tally, AllTied) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(12, 2);
  auto t = dominance_tally(a, a);
  for (double c : t.counts) EXPECT_DOUBLE_EQ(c, 3.0);
  EXPECT_DOUBLE_EQ(t.total, 12);
}

TEST(Tally, SingleDominance) {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 1, 1;
  b << 2, 2;
  auto t = dominance_tally(a, b);
  EXPECT_EQ(t.counts[t.index("<<")], 1.0);
  EXPECT_EQ(t.counts[t.index(">>")], 0.0);
  EXPECT_EQ(t.counts[t.index("<>")], 0.0);
}

TEST(Tally, ConservationAndAntisymmetry) {
  Eigen::MatrixXd a = wave(25, 3, 0), b = wave(25, 3, 0.4);
  a(3, 1) = b(3, 1);
  a(7, 0) = b(7, 0);
  a(7, 2) = b(7, 2);
  auto ab = dominance_tally(a, b), ba = dominance_tally(b, a);
  double sum = 0;
  for (double c : ab.counts) sum += c;
  EXPECT_DOUBLE_EQ(sum, 25);
  std::size_t full = ab.counts.size() - 1;
  for (std::size_t p = 0; p <= full; ++p) EXPECT_DOUBLE_EQ(ab.counts[p], ba.counts[full ^ p]);
}

TEST(Tally, PatternStrings) {
  auto t = DominanceTally::from_counts(4, std::vector<double>(16, 1));
  EXPECT_EQ(t.pattern(0), "<<<<");
  EXPECT_EQ(t.pattern(15), ">>>>");
  EXPECT_EQ(t.pattern(8), "><<<");
  EXPECT_EQ(t.index("><<<"), 8u);
  EXPECT_THROW(t.index("<<"), ValueError);
}

TEST(Glrt, Concentrated) {
  std::vector<double> c(8, 0.0);
  c[0] = 100;
  auto r = glrt_multimeasure(DominanceTally::from_counts(3, c), config(), 2000);
  EXPECT_LT(r.lambda, 1e-10);
  EXPECT_LT(r.p_value, 0.01);
  EXPECT_EQ(r.best_pattern, "<<<");
}

TEST(Glrt, Uniform) {
  auto r = glrt_multimeasure(DominanceTally::from_counts(2, {5, 5, 5, 5}), config(), 2000);
  EXPECT_DOUBLE_EQ(r.lambda, 1.0);
  EXPECT_GT(r.p_value, 0.95);
}

TEST(Glrt, LambdaRange) {
  std::vector<std::vector<double>> cases{{3, 1, 0, 0}, {2, 2, 1, 0}, {0.5, 4, 4, 1}, {7, 6.5, 0, 0.5}};
  for (const auto& c : cases) {
    double l = detail::glrt_lambda(c);
    EXPECT_GT(l, 0);
    EXPECT_LE(l, 1);
    auto s = c;
    std::sort(s.rbegin(), s.rend());
    EXPECT_EQ(l == 1.0, s[0] == s[1]);
  }
}

TEST(Glrt, ClosedFormLambda) {
  // top two counts c1, c2: lambda = ((c1+c2)/2)^(c1+c2) / (c1^c1 c2^c2)
  auto r = glrt_multimeasure(DominanceTally::from_counts(2, {6, 2, 1, 1}), config(), 1000);
  double want = std::pow(4.0, 8) / (std::pow(6.0, 6) * std::pow(2.0, 2));
  EXPECT_NEAR(r.lambda, want, 1e-12);
}

TEST(Glrt, Deterministic) {
  auto t = DominanceTally::from_counts(2, {6, 3, 2, 1});
  auto a = glrt_multimeasure(t, config(), 3000), b = glrt_multimeasure(t, config(), 3000);
  auto c4 = config();
  c4.threads = 3;
  auto c = glrt_multimeasure(t, c4, 3000);
  EXPECT_EQ(a.p_value, b.p_value);
  EXPECT_EQ(a.p_value, c.p_value);
}

TEST(BayesMultimeasure, Concentrated) {
  std::vector<double> c(4, 0.0);
  c[0] = 30;
  auto r = bayes_multimeasure(DominanceTally::from_counts(2, c), config(20000, 1e-6));
  EXPECT_GT(r.pattern_probabilities[0], 0.999);
}

TEST(BayesMultimeasure, UniformSymmetric) {
  auto r = bayes_multimeasure(DominanceTally::from_counts(2, {10, 10, 10, 10}), config(40000));
  double sum = 0;
  for (double p : r.pattern_probabilities) {
    EXPECT_NEAR(p, 0.25, 0.02);
    sum += p;
  }
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(Hotelling, Equal) {
  Eigen::MatrixXd a = wave(10, 2, 0);
  auto r = hotelling_t2(a, a);
  EXPECT_EQ(r.statistic, 0);
  EXPECT_EQ(r.p_value, 1);
}

TEST(Hotelling, OneMeasureIsPairedT) {
  Eigen::MatrixXd a = wave(10, 1, 0), b = wave(10, 1, 0.3);
  std::vector<double> x(a.data(), a.data() + 10), y(b.data(), b.data() + 10);
  auto t = t_test_paired(x, y).statistic("t");
  auto r = hotelling_t2(a, b);
  EXPECT_NEAR(r.statistic, t * t, 1e-9);
  EXPECT_NEAR(r.p_value, t_test_paired(x, y).p_value(), 1e-9);
}

TEST(Hotelling, PlantedShift) {
  Eigen::MatrixXd a = wave(30, 2, 0), b = wave(30, 2, 1.1);
  Eigen::MatrixXd d = a - b;
  double sd = std::sqrt((d.col(0).array() - d.col(0).mean()).square().sum() / 29);
  a.col(0).array() += 3 * sd;
  EXPECT_LT(hotelling_t2(a, b).p_value, 0.001);
}

TEST(Hotelling, AffineInvariance) {
  Eigen::MatrixXd a = wave(15, 3, 0), b = wave(15, 3, 0.7);
  for (int i = 0; i < 15; ++i)
    for (int c = 0; c < 3; ++c) b(i, c) += 0.4 * std::cos(0.37 * i * i + 1.1 * c * c);
  Eigen::Matrix3d A;
  A << 2, 1, 0, 0, 1, -1, 1, 0, 3;
  auto r1 = hotelling_t2(a, b), r2 = hotelling_t2(a * A.transpose(), b * A.transpose());
  EXPECT_NEAR(r1.statistic, r2.statistic, 1e-6);
}

TEST(Hotelling, Contracts) {
  Eigen::MatrixXd a = wave(3, 3, 0), b = wave(3, 3, 1);
  EXPECT_THROW(hotelling_t2(a, b), SizeError);
  Eigen::MatrixXd c = wave(10, 2, 0), e = wave(10, 2, 1);
  c.col(1) = c.col(0);
  e.col(1) = e.col(0);
  EXPECT_THROW(hotelling_t2(c, e), DegenerateError);
}
