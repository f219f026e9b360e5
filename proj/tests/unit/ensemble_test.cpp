#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "chartdate/ensemble.hpp"
#include "generators.hpp"

namespace chartdate {
namespace {

double sum(const std::vector<double>& w) { return std::accumulate(w.begin(), w.end(), 0.0); }

TEST(BlendPredict, Examples) {
  const std::vector<double> w{0.5, 0.3, 0.2};
  const std::vector<double> row{1250, 1260, 1245};
  EXPECT_DOUBLE_EQ(blend_predict(w, row), 625 + 378 + 249);
  EXPECT_DOUBLE_EQ(blend_predict(std::vector<double>{0.6, 0.4}, std::vector<double>{1250.0, 1258.5}), 1253.4);
  EXPECT_THROW(blend_predict(w, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(FitBlend, ExactMethodTakesAllWeight) {
  testing::Rng rng(1);
  EstimateMatrix est;
  std::vector<double> truth;
  for (int i = 0; i < 30; ++i) {
    const double y = testing::uniform_int(rng, 1100, 1300);
    truth.push_back(y);
    est.push_back({y + testing::uniform_real(rng, -20, 20), y, y + testing::uniform_real(rng, -40, 40)});
  }
  const auto b = fit_blend(est, truth);
  ASSERT_EQ(b.weights.size(), 3u);
  EXPECT_NEAR(b.weights[1], 1.0, 1e-6);
  EXPECT_NEAR(b.weights[0], 0.0, 1e-6);
  EXPECT_NEAR(b.weights[2], 0.0, 1e-6);
  EXPECT_NEAR(blend_mse(est, truth, b.weights), 0.0, 1e-6);
}

TEST(FitBlend, IdenticalMethodsSplitOrCollapse) {
  EstimateMatrix est;
  std::vector<double> truth;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(1200 + i);
    const double e = 1200 + i + (i % 2 ? 3 : -4);
    est.push_back({e, e});
  }
  // Every sum-to-one weighting is optimal; any returned one must match a
  // single method's error.
  const auto b = fit_blend(est, truth);
  EXPECT_NEAR(sum(b.weights), 1.0, 1e-12);
  EXPECT_LE(blend_mse(est, truth, b.weights), blend_mse(est, truth, std::vector<double>{1.0, 0.0}));
}

TEST(FitBlend, OppositeBiasesCancel) {
  EstimateMatrix est;
  std::vector<double> truth;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(1200 + 5 * i);
    est.push_back({1200 + 5 * i + 10.0, 1200 + 5 * i - 10.0});
  }
  const auto b = fit_blend(est, truth);
  EXPECT_NEAR(b.weights[0], 0.5, 1e-6);
  EXPECT_LT(blend_mse(est, truth, b.weights), 1e-6);
}

TEST(FitBlend, Errors) {
  const std::vector<double> truth{1, 2, 3};
  EXPECT_THROW(fit_blend({{1}, {2}, {3}}, truth), std::invalid_argument);
  EXPECT_THROW(fit_blend({{1, 2}, {2, 3}}, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(fit_blend({{1, 2}, {2}, {3, 4}}, truth), std::invalid_argument);
  EXPECT_THROW(fit_blend({{1, 2}, {2, 3}, {3, 4}}, std::vector<double>{1, 2}), std::invalid_argument);
}

// The blend never does worse than the best single method, and adding a
// method never raises the fitted error.
TEST(FitBlendProperty, DominatesSingleMethodsAndSubsets) {
  testing::Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = testing::uniform_int(rng, 5, 40);
    const int p = testing::uniform_int(rng, 2, 4);
    EstimateMatrix est;
    std::vector<double> truth;
    std::vector<double> bias(static_cast<std::size_t>(p + 1));
    for (auto& b : bias) b = testing::uniform_real(rng, -30, 30);
    for (int i = 0; i < n; ++i) {
      const double y = testing::uniform_int(rng, 1100, 1300);
      truth.push_back(y);
      std::vector<double> row;
      for (int j = 0; j <= p; ++j) row.push_back(y + bias[static_cast<std::size_t>(j)] + testing::uniform_real(rng, -25, 25));
      est.push_back(row);
    }
    EstimateMatrix smaller;
    for (const auto& row : est) smaller.emplace_back(row.begin(), row.end() - 1);
    if (static_cast<int>(smaller.size()) < p + 1 || static_cast<int>(est.size()) < p + 2) continue;

    for (bool nonneg : {false, true}) {
      BlendOptions opt;
      opt.nonnegative = nonneg;
      const auto full = fit_blend(est, truth, opt);
      const auto part = fit_blend(smaller, truth, opt);
      ASSERT_NEAR(sum(full.weights), 1.0, 1e-9);
      const double mse_full = blend_mse(est, truth, full.weights);
      const double mse_part = blend_mse(smaller, truth, part.weights);
      ASSERT_LE(mse_full, mse_part * (1 + 1e-6) + 1e-9);
      for (int j = 0; j <= p; ++j) {
        std::vector<double> unit(static_cast<std::size_t>(p + 1), 0.0);
        unit[static_cast<std::size_t>(j)] = 1.0;
        ASSERT_LE(mse_full, blend_mse(est, truth, unit) + 1e-9);
      }
      if (nonneg) {
        for (double w : full.weights) ASSERT_GE(w, 0.0);
      }
    }
  }
}

// Unconstrained weights against the closed form w = G^-1 1 / 1' G^-1 1 for
// two methods.
TEST(FitBlendProperty, TwoMethodClosedForm) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    EstimateMatrix est;
    std::vector<double> truth;
    double g11 = 0, g12 = 0, g22 = 0;
    for (int i = 0; i < 20; ++i) {
      const double y = testing::uniform_int(rng, 1100, 1300);
      const double a = testing::uniform_real(rng, -30, 30), b = testing::uniform_real(rng, -30, 30) + 5;
      truth.push_back(y);
      est.push_back({y + a, y + b});
      g11 += a * a;
      g12 += a * b;
      g22 += b * b;
    }
    const double w1 = (g22 - g12) / (g11 - 2 * g12 + g22);
    const auto fit = fit_blend(est, truth);
    ASSERT_NEAR(fit.weights[0], w1, 1e-5);
  }
}

}  // namespace
}  // namespace chartdate
