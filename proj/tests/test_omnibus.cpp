#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <optistat/omnibus.hpp>
#include <optistat/pairwise.hpp>

#include "support.hpp"

using namespace optistat;
using testing_support::matrix;

namespace {

std::vector<double> normal_scores(int n) {
  boost::math::normal nd;
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(quantile(nd, (i - 0.375) / (n + 0.25)));
  return v;
}

ResultsMatrix columns(const std::vector<std::vector<double>>& cols) {
  std::vector<std::vector<double>> rows(cols[0].size(), std::vector<double>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < cols[j].size(); ++i) rows[i][j] = cols[j][i];
  return matrix(rows);
}

}  // namespace

TEST(Anova, Constant) {
  EXPECT_THROW(anova_oneway(matrix({{2, 2}, {2, 2}, {2, 2}})), DegenerateError);
}

TEST(Anova, TwoGroupsIsPooledT) {
  std::vector<double> a{1, 4, 2, 7, 3, 5}, b{6, 8, 5, 9, 11, 7};
  auto r = anova_oneway(columns({a, b}));
  double ma = 0, mb = 0, sa = 0, sb = 0, n = 6;
  for (int i = 0; i < 6; ++i) ma += a[i] / n, mb += b[i] / n;
  for (int i = 0; i < 6; ++i) sa += (a[i] - ma) * (a[i] - ma), sb += (b[i] - mb) * (b[i] - mb);
  double sp2 = (sa + sb) / (2 * n - 2);
  double t = (ma - mb) / std::sqrt(sp2 * (2 / n));
  EXPECT_NEAR(r.statistic, t * t, 1e-9);
}

TEST(Anova, NoWithinSpread) {
  auto r = anova_oneway(columns({{0, 0, 0}, {1, 1, 1}}));
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_TRUE(r.rejected);
}

TEST(Friedman, Constant) {
  auto r = friedman_test(matrix({{1, 1, 1}, {5, 5, 5}, {2, 2, 2}}));
  EXPECT_DOUBLE_EQ(r.statistic, 0);
  EXPECT_DOUBLE_EQ(r.p_value, 1);
}

TEST(Friedman, VariantsAgreeOnDirection) {
  auto m = testing_support::cec17();
  for (auto v : {FriedmanVariant::chi_square, FriedmanVariant::iman_davenport, FriedmanVariant::aligned,
                 FriedmanVariant::quade}) {
    auto r = friedman_test(m, v);
    EXPECT_TRUE(r.rejected) << variant_name(v);
    EXPECT_GT(r.statistic, 0) << variant_name(v);
  }
}

TEST(Friedman, TwoAlgorithmsNote) {
  auto r = friedman_test(matrix({{1, 2}, {2, 1}, {1, 3}}));
  EXPECT_FALSE(r.notes.empty());
}

TEST(MultipleSign, ControlDominates) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({double(i), i + 1.0, i + 2.0});
  auto f = multiple_sign_test(matrix(rows), "A0");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_TRUE(f.hypotheses[0].rejected);
  EXPECT_TRUE(f.hypotheses[1].rejected);
}

TEST(MultipleSign, AllTies) {
  auto f = multiple_sign_test(matrix({{1, 1, 1}, {2, 2, 2}, {3, 3, 3}}), "A0");
  EXPECT_TRUE(f.degenerate);
  for (const auto& h : f.hypotheses) EXPECT_FALSE(h.rejected);
}

TEST(MultipleSign, SingleOpponentMatchesSignTest) {
  std::vector<std::vector<double>> rows;
  std::vector<double> x, y;
  for (int i = 0; i < 14; ++i) {
    double a = i, b = (i % 5 == 0) ? i - 1.0 : i + 1.0;
    rows.push_back({a, b});
    x.push_back(a);
    y.push_back(b);
  }
  for (double alpha : {0.01, 0.05, 0.1}) {
    auto f = multiple_sign_test(matrix(rows), "A0", alpha);
    EXPECT_EQ(f.hypotheses[0].rejected, sign_test(x, y, alpha).rejected) << alpha;
  }
}

TEST(ShapiroWilk, TextbookExample) {
  auto r = shapiro_wilk({148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236});
  EXPECT_NEAR(r.w, 0.79, 0.01);
}

TEST(ShapiroWilk, NormalScoresLookNormal) {
  auto r = shapiro_wilk(normal_scores(100));
  EXPECT_GT(r.w, 0.98);
  EXPECT_GT(r.p_value, 0.5);
}

TEST(ShapiroWilk, ExponentialQuantilesRejected) {
  std::vector<double> v;
  for (int i = 1; i <= 60; ++i) v.push_back(-std::log(1 - (i - 0.5) / 60));
  EXPECT_LT(shapiro_wilk(v).p_value, 0.01);
}

TEST(ShapiroWilk, InvariantToAffineMaps) {
  std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7};
  auto a = shapiro_wilk(v);
  for (auto& x : v) x = 2.5 * x - 7;
  auto b = shapiro_wilk(v);
  EXPECT_NEAR(a.w, b.w, 1e-12);
  EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
}

TEST(Levene, IdenticalColumns) {
  EXPECT_THROW(levene_test(columns({std::vector<double>(10, 1.0), std::vector<double>(10, 1.0)})),
               DegenerateError);
}

TEST(Levene, PlantedVarianceRatio) {
  auto a = normal_scores(50);
  std::vector<double> b(50);
  for (int i = 0; i < 50; ++i) b[i] = 10 * a[(i * 17) % 50];
  EXPECT_LT(levene_test(columns({a, b})).p_value, 0.01);
}

TEST(Levene, PermutedCopy) {
  auto a = normal_scores(20);
  std::vector<double> b(a.rbegin(), a.rend());
  auto r = levene_test(columns({a, b}));
  EXPECT_NEAR(r.statistic, 0, 1e-12);
  EXPECT_NEAR(r.p_value, 1, 1e-9);
}
