#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "chartdate/error.hpp"
#include "chartdate/synthetic.hpp"

namespace chartdate {
namespace {

SyntheticModel single_word() {
  SyntheticModel m;
  m.year_min = 1200;
  m.year_max = 1210;
  m.words = {"only"};
  m.trajectories = {Trajectory{}};
  m.doc_length = 5;
  return m;
}

TEST(Trajectory, Shapes) {
  Trajectory t;
  t.shape = TrajectoryShape::ramp_in;
  t.center = 1200;
  t.softness = 10;
  t.weight = 2;
  EXPECT_DOUBLE_EQ(t.value(1200), 1.0);
  t.shape = TrajectoryShape::ramp_out;
  EXPECT_DOUBLE_EQ(t.value(1200), 1.0);
  EXPECT_LT(t.value(1250), t.value(1150));
  t.support_max = 1199;
  EXPECT_EQ(t.value(1200), 0.0);
}

TEST(Synthetic, SingleWordModel) {
  auto m = single_word();
  EXPECT_EQ(m.probabilities(1205), std::vector<double>{1.0});
  EXPECT_FALSE(m.identifiable());
  const auto docs = generate_corpus(m, 20, 1);
  ASSERT_EQ(docs.size(), 20u);
  for (const auto& d : docs) {
    EXPECT_EQ(d.tokens, std::vector<std::string>(5, "only"));
    EXPECT_GE(*d.year, 1200);
    EXPECT_LE(*d.year, 1210);
  }
  EXPECT_EQ(docs[0].id, "synth-000000");
  EXPECT_TRUE(generate_corpus(m, 0, 1).empty());
}

TEST(Synthetic, Validation) {
  auto m = single_word();
  m.words.push_back("extra");
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = single_word();
  m.trajectories[0].support_max = 1205;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  SyntheticSpec spec;
  spec.kind = "bogus";
  EXPECT_THROW(make_model(spec), std::invalid_argument);
  spec.kind = "two_regime";
  spec.regime_year = 1000;
  EXPECT_THROW(make_model(spec), std::invalid_argument);
}

TEST(Synthetic, DeterministicPerSeed) {
  const auto m = make_model(SyntheticSpec{});
  const auto a = generate_corpus(m, 30, 5);
  const auto b = generate_corpus(m, 30, 5);
  const auto c = generate_corpus(m, 30, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].year, b[i].year);
    EXPECT_EQ(a[i].tokens, b[i].tokens);
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i].tokens != c[i].tokens;
  EXPECT_TRUE(differs);
}

TEST(Synthetic, TwoRegimeSupport) {
  SyntheticSpec spec;
  spec.kind = "two_regime";
  spec.vocabulary = 50;
  const auto m = make_model(spec);
  EXPECT_TRUE(m.identifiable());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.words.size(); ++i) index[m.words[i]] = i;
  for (const auto& d : generate_corpus(m, 100, 3))
    for (const auto& w : d.tokens) {
      const bool first_regime = index.at(w) % 2 == 0;
      ASSERT_EQ(first_regime, *d.year < spec.regime_year) << w << " in " << *d.year;
    }
}

TEST(Synthetic, DeedsDatesAndLengths) {
  SyntheticSpec spec;
  spec.kind = "deeds";
  spec.vocabulary = 100;
  const auto m = make_model(spec);
  const auto docs = generate_corpus(m, 5000, 11);
  double sum = 0;
  std::vector<int> lengths;
  for (const auto& d : docs) {
    ASSERT_GE(*d.year, 1089);
    ASSERT_LE(*d.year, 1438);
    sum += *d.year;
    lengths.push_back(static_cast<int>(d.tokens.size()));
  }
  EXPECT_NEAR(sum / docs.size(), 1237.0, 3.0);
  std::sort(lengths.begin(), lengths.end());
  EXPECT_NEAR(lengths[lengths.size() / 2], 202, 10);
  const double mean_len = std::accumulate(lengths.begin(), lengths.end(), 0.0) / lengths.size();
  EXPECT_NEAR(mean_len, 237, 10);
  EXPECT_GE(lengths.front(), 15);
  EXPECT_LE(lengths.back(), 2054);
}

// Word frequencies within a year sit within 4 sigma of the binomial
// expectation.
TEST(SyntheticProperty, WordFrequenciesFollowModel) {
  SyntheticSpec spec;
  spec.vocabulary = 20;
  spec.year_min = 1200;
  spec.year_max = 1201;
  auto m = make_model(spec);
  m.doc_length = 1000;
  const auto docs = generate_corpus(m, 200, 4);
  std::map<int, std::map<std::string, double>> counts;
  std::map<int, double> totals;
  for (const auto& d : docs) {
    for (const auto& w : d.tokens) counts[*d.year][w] += 1;
    totals[*d.year] += d.tokens.size();
  }
  for (auto& [year, per_word] : counts) {
    const auto p = m.probabilities(year);
    const double n = totals[year];
    for (std::size_t i = 0; i < m.words.size(); ++i) {
      const double expected = n * p[i];
      const double sd = std::sqrt(n * p[i] * (1 - p[i]));
      ASSERT_NEAR(per_word[m.words[i]], expected, 4 * sd + 1e-9) << m.words[i];
    }
  }
}

TEST(SyntheticSpec, Parsing) {
  std::istringstream in("# model\nkind = two_regime\nvocabulary=40  # small\n\nregime_year = 1180\nzipf = 0.8\n");
  const auto spec = read_synthetic_spec(in);
  EXPECT_EQ(spec.kind, "two_regime");
  EXPECT_EQ(spec.vocabulary, 40);
  EXPECT_EQ(spec.regime_year, 1180);
  EXPECT_DOUBLE_EQ(spec.zipf, 0.8);

  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(read_synthetic_spec(unknown), DataError);
  std::istringstream malformed("kind two_regime\n");
  EXPECT_THROW(read_synthetic_spec(malformed), DataError);
  std::istringstream bad_value("vocabulary = many\n");
  EXPECT_THROW(read_synthetic_spec(bad_value), DataError);
  EXPECT_THROW(read_synthetic_spec_file("/nonexistent/model.cfg"), DataError);
}

}  // namespace
}  // namespace chartdate
