#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vfxgb/error.h"
#include "vfxgb/metrics.h"

using namespace vfxgb;

namespace {

// Two-sample KS statistic from the empirical CDFs of each class.
double ecdf_ks(const std::vector<int>& y, const std::vector<double>& s) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(s[i]);
  std::vector<double> grid = s;
  std::sort(grid.begin(), grid.end());
  double best = 0.0;
  for (double t : grid) {
    const double fp = static_cast<double>(std::count_if(pos.begin(), pos.end(), [&](double v) { return v <= t; })) / pos.size();
    const double fn = static_cast<double>(std::count_if(neg.begin(), neg.end(), [&](double v) { return v <= t; })) / neg.size();
    best = std::max(best, std::abs(fp - fn));
  }
  return best;
}

// Pairwise win counting with ties as one half.
double pair_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

}  // namespace

TEST(Metrics, FourPointExample) {
  const std::vector<int> y = {1, 0, 1, 0};
  const std::vector<double> s = {0.9, 0.8, 0.4, 0.2};
  EXPECT_DOUBLE_EQ(metrics::auc(y, s), 0.75);
  EXPECT_DOUBLE_EQ(metrics::ks(y, s), 0.5);
}

TEST(Metrics, PerfectAndTiedScores) {
  const std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(metrics::auc(y, std::vector<double>{0.1, 0.2, 0.8, 0.9}), 1.0);
  EXPECT_DOUBLE_EQ(metrics::ks(y, std::vector<double>{0.1, 0.2, 0.8, 0.9}), 1.0);
  EXPECT_DOUBLE_EQ(metrics::auc(y, std::vector<double>(4, 0.3)), 0.5);
  EXPECT_DOUBLE_EQ(metrics::ks(y, std::vector<double>(4, 0.3)), 0.0);
  EXPECT_DOUBLE_EQ(metrics::ks(y, std::vector<double>{0.1, 0.2, 0.1, 0.2}), 0.0);
}

TEST(Metrics, RejectsSingleClass) {
  const std::vector<int> y = {1, 1};
  const std::vector<double> s = {0.1, 0.2};
  EXPECT_THROW(metrics::auc(y, s), InvalidArgument);
  EXPECT_THROW(metrics::ks(y, s), InvalidArgument);
  EXPECT_THROW(metrics::auc(std::vector<int>{0, 2}, s), InvalidArgument);
  EXPECT_THROW(metrics::auc(std::vector<int>{0, 1, 1}, s), InvalidArgument);
}

TEST(Metrics, AgreesWithOraclesOnRandomInput) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 60);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(gen() % 2);
      s[i] = static_cast<double>(gen() % 10) / 10.0;  // many ties
    }
    y[0] = 0;
    y[1] = 1;
    ASSERT_NEAR(metrics::auc(y, s), pair_auc(y, s), 1e-12);
    ASSERT_NEAR(metrics::ks(y, s), ecdf_ks(y, s), 1e-12);
  }
}

TEST(Metrics, AucInvariances) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<int> y(300);
  std::vector<double> s(300), t(300), neg(300);
  for (int i = 0; i < 300; ++i) {
    y[i] = i % 3 == 0;
    s[i] = nd(gen) + y[i];
    t[i] = std::exp(3 * s[i]) + 1;
    neg[i] = -s[i];
  }
  EXPECT_DOUBLE_EQ(metrics::auc(y, s), metrics::auc(y, t));
  EXPECT_NEAR(metrics::auc(y, s) + metrics::auc(y, neg), 1.0, 1e-12);
}

TEST(Metrics, LogLoss) {
  EXPECT_NEAR(metrics::log_loss(std::vector<int>{1, 0}, std::vector<double>{1.0, 0.0}), 0.0, 1e-11);
  EXPECT_NEAR(metrics::log_loss(std::vector<int>{1, 0, 1}, std::vector<double>(3, 0.5)), std::log(2.0), 1e-15);
  EXPECT_NEAR(metrics::log_loss(std::vector<int>{1, 0}, std::vector<double>{0.8, 0.3}),
              -(std::log(0.8) + std::log(0.7)) / 2, 1e-15);
  EXPECT_TRUE(std::isfinite(metrics::log_loss(std::vector<int>{1}, std::vector<double>{0.0})));
}
