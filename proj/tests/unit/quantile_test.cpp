#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "chartdate/error.hpp"
#include "chartdate/quantile.hpp"
#include "generators.hpp"

namespace chartdate {
namespace {

double check_loss(const std::vector<double>& v, const std::vector<double>& w, double q, double c) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double u = v[i] - c;
    s += w[i] * u * (q - (u < 0 ? 1.0 : 0.0));
  }
  return s;
}

QrConfig config(double q, double h, double min_mass = 0.0) {
  QrConfig c;
  c.q = q;
  c.kernel = KernelSpec{KernelShape::gaussian, h};
  c.min_mass = min_mass;
  return c;
}

TEST(WeightedQuantile, Examples) {
  const std::vector<double> v{5, 1, 4, 2, 3};
  const std::vector<double> w(5, 1.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.5), 3.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.2), 1.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.3), 2.0);
  EXPECT_EQ(weighted_quantile(v, std::vector<double>{0, 0, 0, 0, 1}, 0.01), 3.0);
  EXPECT_EQ(weighted_quantile(v, std::vector<double>{1, 0, 0, 0, 9}, 0.5), 3.0);
}

TEST(WeightedQuantile, Errors) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(weighted_quantile(v, std::vector<double>{1}, 0.5), std::invalid_argument);
  EXPECT_THROW(weighted_quantile({}, {}, 0.5), std::invalid_argument);
  EXPECT_THROW(weighted_quantile(v, std::vector<double>{1, -1}, 0.5), std::invalid_argument);
  EXPECT_THROW(weighted_quantile(v, std::vector<double>{0, 0}, 0.5), std::invalid_argument);
  EXPECT_THROW(weighted_quantile(v, std::vector<double>{1, 1}, 1.0), std::invalid_argument);
}

// With integer weights the definition is exact: the smallest candidate c
// whose weight at or below reaches q * total.
TEST(WeightedQuantileProperty, MatchesDefinitionAndMinimizesCheckLoss) {
  testing::Rng rng(9);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = testing::uniform_int(rng, 1, 15);
    std::vector<double> v(static_cast<std::size_t>(n)), w(v.size());
    for (auto& x : v) x = testing::uniform_int(rng, 0, 8) / 8.0;
    for (auto& x : w) x = testing::uniform_int(rng, 0, 5);
    w[0] += 1;
    const double q = testing::uniform_int(rng, 1, 19) / 20.0;
    const double got = weighted_quantile(v, w, q);

    double total = 0;
    for (double x : w) total += x;
    double oracle = std::numeric_limits<double>::infinity();
    for (double c : v) {
      double below = 0;
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] <= c) below += w[i];
      if (below >= q * total) oracle = std::min(oracle, c);
    }
    ASSERT_EQ(got, oracle);

    double best = std::numeric_limits<double>::infinity();
    for (double c : v) best = std::min(best, check_loss(v, w, q, c));
    ASSERT_LE(check_loss(v, w, q, got), best + 1e-9);
  }
}

TEST(WeightedQuantileProperty, MonotoneInQAndShiftEquivariant) {
  testing::Rng rng(10);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = testing::uniform_int(rng, 1, 20);
    std::vector<double> v(static_cast<std::size_t>(n)), w(v.size());
    for (auto& x : v) x = testing::uniform_real(rng, 0, 1);
    for (auto& x : w) x = testing::uniform_real(rng, 0.01, 2);
    double prev = -1;
    for (double q = 0.05; q < 1.0; q += 0.05) {
      const double c = weighted_quantile(v, w, q);
      ASSERT_GE(c, prev);
      prev = c;
    }
    std::vector<double> shifted(v);
    for (auto& x : shifted) x += 3.0;
    ASSERT_EQ(weighted_quantile(shifted, w, 0.3), weighted_quantile(v, w, 0.3) + 3.0);
    std::vector<double> scaled(w);
    for (auto& x : scaled) x *= 7.0;
    ASSERT_EQ(weighted_quantile(v, scaled, 0.5), weighted_quantile(v, w, 0.5));
  }
}

TEST(QrCurve, MatchesPerYearOracle) {
  testing::Rng rng(4);
  const auto train = testing::random_corpus(rng, 60, 10, 5, 20, 1200, 1240);
  QrModel model(train);
  const auto target = testing::random_document(rng, "t", 10, 5, 20);
  const auto d = model.distances_to(target);
  const auto c = config(0.2, 5.0, 3.0);
  const auto curve = qr_curve(d, model, c);
  std::size_t e = 0;
  for (int t = model.year_min(); t <= model.year_max(); ++t) {
    std::vector<double> w;
    double mass = 0;
    for (const auto& doc : train) {
      w.push_back(std::exp(-std::pow((*doc.year - t) / 5.0, 2)));
      mass += w.back();
    }
    if (mass < 3.0) continue;
    ASSERT_LT(e, curve.years.size());
    ASSERT_EQ(curve.years[e], t);
    ASSERT_NEAR(curve.masses[e], mass, 1e-9);
    ASSERT_EQ(curve.values[e], weighted_quantile(d, w, 0.2));
    ++e;
  }
  EXPECT_EQ(e, curve.years.size());
}

TEST(QrCurve, MassThresholdAndVariableBandwidth) {
  std::vector<Document> train;
  for (int i = 0; i < 10; ++i) train.push_back(Document{"a" + std::to_string(i), 1200, {"x", "y"}});
  train.push_back(Document{"b", 1230, {"x", "z"}});
  QrModel model(train);
  const std::vector<double> d(model.size(), 0.5);
  EXPECT_THROW(qr_curve(d, model, config(0.5, 2.0, 50.0)), DataError);

  auto c = config(0.5, 2.0, 0.5);
  const auto narrow = qr_curve(d, model, c);
  c.variable_bandwidth = true;
  c.m0 = 30.0;
  const auto wide = qr_curve(d, model, c);
  EXPECT_GT(wide.years.size(), narrow.years.size());
  for (std::size_t e = 0; e < wide.years.size(); ++e) EXPECT_GE(wide.bandwidths[e], 2.0);
}

TEST(QrDate, ChoosesYearOfNearNeighbours) {
  std::vector<Document> train;
  std::vector<double> d;
  for (int y = 1200; y <= 1240; ++y) {
    train.push_back(Document{"d" + std::to_string(y), y, {"w"}});
    d.push_back(std::abs(y - 1217) / 40.0);
  }
  QrModel model(train);
  // A kernel confined to the year itself makes the curve the distances.
  QrConfig c = config(0.1, 1.0);
  c.kernel.shape = KernelShape::epanechnikov;
  const auto est = qr_date(d, model, c);
  EXPECT_EQ(est.year_hat, 1217.0);
  EXPECT_FALSE(est.has_flag(flags::kTie));
  EXPECT_EQ(est.curve.size(), 41u);
}

TEST(QrDate, FlatCurveGoesToMedianWithTie) {
  std::vector<Document> train;
  for (int y = 1200; y <= 1210; ++y) train.push_back(Document{"d" + std::to_string(y), y, {"w"}});
  train.push_back(Document{"x", 1201, {"w"}});
  QrModel model(train);
  const std::vector<double> d(model.size(), 0.25);
  // Median 1204.5: 1204 and 1205 are equally close, the smaller wins.
  const auto est = qr_date(d, model, config(0.5, 3.0));
  EXPECT_EQ(est.year_hat, 1204.0);
  EXPECT_TRUE(est.has_flag(flags::kTie));
}

TEST(QrDate, FewerThanThreeYearsIsUndatable) {
  std::vector<Document> train{{"a", 1200, {"w"}}, {"b", 1201, {"w"}}};
  QrModel model(train);
  EXPECT_THROW(qr_date(std::vector<double>{0.1, 0.2}, model, config(0.5, 1.0)), DataError);
  EXPECT_THROW(QrModel(std::vector<Document>{}), DataError);
  EXPECT_THROW(QrModel(std::vector<Document>{{"u", std::nullopt, {"w"}}}), DataError);
}

TEST(QrTune, SinglePointAndTieBreaking) {
  testing::Rng rng(5);
  const auto train = testing::random_corpus(rng, 60, 10, 5, 20, 1200, 1240);
  const auto val = testing::random_corpus(rng, 10, 10, 5, 20, 1200, 1240);
  QrModel model(train);
  const std::vector<double> one_q{0.3}, one_h{8.0};
  const auto single = qr_tune(val, model, one_q, one_h, config(0.5, 1.0));
  EXPECT_EQ(single.config.q, 0.3);
  EXPECT_EQ(single.config.kernel.bandwidth, 8.0);

  // Every config predicts the median when nothing passes the mass threshold,
  // so all tie and the largest h and q win.
  const std::vector<double> qs{0.1, 0.5, 0.3}, hs{2.0, 9.0, 4.0};
  const auto tied = qr_tune(val, model, qs, hs, config(0.5, 1.0, 1e9));
  EXPECT_EQ(tied.config.kernel.bandwidth, 9.0);
  EXPECT_EQ(tied.config.q, 0.5);
  EXPECT_EQ(tied.undated, val.size());

  const std::vector<double> empty;
  EXPECT_THROW(qr_tune(val, model, empty, hs), std::invalid_argument);
}

TEST(QrTuneProperty, MaeIsGridMinimum) {
  testing::Rng rng(6);
  const auto train = testing::random_corpus(rng, 80, 12, 5, 25, 1200, 1250);
  const auto val = testing::random_corpus(rng, 15, 12, 5, 25, 1200, 1250);
  QrModel model(train);
  const std::vector<double> qs{0.1, 0.3}, hs{3.0, 10.0};
  const auto best = qr_tune(val, model, qs, hs, config(0.5, 1.0));
  for (double q : qs)
    for (double h : hs) {
      double sum = 0;
      for (const auto& v : val) {
        double est = model.median_year();
        try {
          est = qr_date(v, model, config(q, h)).year_hat;
        } catch (const DataError&) {
        }
        sum += std::abs(est - *v.year);
      }
      EXPECT_LE(best.mae, sum / val.size() + 1e-12);
    }
}

}  // namespace
}  // namespace chartdate
