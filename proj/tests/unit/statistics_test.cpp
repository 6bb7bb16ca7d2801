#include <gridshield/errors.hpp>
#include <gridshield/statistics.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace gridshield;

TEST(NullThreshold, OrderStatistic) {
  std::vector<double> x;
  for (int i = 100; i >= 1; --i) x.push_back(i);
  // ceil(0.95 * 100) = 95th smallest
  EXPECT_EQ(null_threshold(x, 0.05), 95.0);
  EXPECT_EQ(null_threshold(x, 0.5), 50.0);
  std::size_t above = 0;
  for (double v : x) above += v > null_threshold(x, 0.05) ? 1 : 0;
  EXPECT_LE(above, 5u);
  EXPECT_THROW(null_threshold({}, 0.05), ConfigError);
  EXPECT_THROW(null_threshold(x, 0.0), ConfigError);
  EXPECT_THROW(null_threshold(x, 1.0), ConfigError);
}

TEST(EmpiricalQuantile, Interpolates) {
  const std::vector<double> x{3.0, 1.0, 2.0, 4.0};
  EXPECT_EQ(empirical_quantile(x, 0.0), 1.0);
  EXPECT_EQ(empirical_quantile(x, 1.0), 4.0);
  EXPECT_NEAR(empirical_quantile(x, 0.5), 2.5, 1e-15);
  EXPECT_THROW(empirical_quantile(x, 1.1), DomainError);
}

TEST(Moments, MeanAndVariance) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(mean(x), 2.5);
  EXPECT_NEAR(variance(x), 5.0 / 3.0, 1e-15);
  EXPECT_EQ(variance({1.0}), 0.0);
  EXPECT_TRUE(std::isnan(mean({})));
}

TEST(Spearman, RanksAndTies) {
  EXPECT_EQ(average_ranks({10.0, 30.0, 20.0, 20.0}), (std::vector<double>{1.0, 4.0, 2.5, 2.5}));
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_NEAR(spearman(x, {2, 4, 9, 16, 100}), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, {5, 4, 3, 2, 1}), -1.0, 1e-15);
  // 1 - 6 sum d^2 / (n (n^2 - 1)) with d = (0, 0, 1, -1, 0)
  EXPECT_NEAR(spearman(x, {1, 2, 4, 3, 5}), 1.0 - 6.0 * 2.0 / 120.0, 1e-15);
  EXPECT_TRUE(std::isnan(spearman(x, {1, 1, 1, 1, 1})));
  EXPECT_THROW(spearman(x, {1, 2}), DimensionError);
}

TEST(KsDistance, KnownDistances) {
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const int n = 200;
  std::vector<double> mid(n), right(n);
  for (int i = 0; i < n; ++i) {
    mid[i] = (i + 0.5) / n;
    right[i] = (i + 1.0) / n;
  }
  EXPECT_NEAR(ks_distance(mid, uniform), 0.5 / n, 1e-15);
  EXPECT_NEAR(ks_distance(right, uniform), 1.0 / n, 1e-15);

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(4000);
  for (auto& v : s) v = u(gen);
  EXPECT_LT(ks_distance(s, uniform), 0.05);
  // sup |x - x^2| = 1/4
  EXPECT_NEAR(ks_distance(s, [](double x) { return std::clamp(x * x, 0.0, 1.0); }), 0.25, 0.05);
  EXPECT_EQ(ks_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(ks_distance(std::vector<double>{1, 2}, std::vector<double>{3, 4}), 1.0);
  EXPECT_EQ(ks_distance(std::vector<double>{1, 3}, std::vector<double>{2, 4}), 0.5);
}

TEST(RocCurve, MonotoneAndEndpoints) {
  const std::vector<double> null{0.1, 0.4, 0.35, 0.8};
  const std::vector<double> alt{0.9, 0.5, 0.7, 0.2};
  const auto roc = roc_curve(null, alt);
  ASSERT_FALSE(roc.empty());
  EXPECT_EQ(roc.front().p_fa, 1.0);
  EXPECT_EQ(roc.front().p_d, 1.0);
  EXPECT_EQ(roc.back().p_fa, 0.0);
  EXPECT_EQ(roc.back().p_d, 0.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    EXPECT_LE(roc[i].p_fa, roc[i - 1].p_fa);
    EXPECT_LE(roc[i].p_d, roc[i - 1].p_d);
  }
  // threshold 0.4: null {0.8} above, alt {0.9, 0.5, 0.7}
  EXPECT_EQ(pd_at_pfa(roc, 0.25), 0.75);
  EXPECT_EQ(pd_at_pfa(roc, 0.0), 0.25);
  EXPECT_THROW(roc_curve({}, alt), ConfigError);
}
