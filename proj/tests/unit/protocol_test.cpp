#include <gtest/gtest.h>

#include <set>

#include "chartdate/error.hpp"
#include "chartdate/protocol.hpp"
#include "chartdate/synthetic.hpp"

namespace chartdate {
namespace {

std::vector<Document> corpus(std::size_t n, std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.kind = "two_regime";
  spec.vocabulary = 200;
  spec.doc_length = 60;
  return generate_corpus(make_model(spec), n, seed);
}

const EvalReport* find(const ProtocolResult& r, const std::string& method, const std::string& split) {
  for (const auto& rep : r.reports)
    if (rep.method == method && rep.split == split) return &rep;
  return nullptr;
}

TEST(Grid, ExpandAndFormat) {
  EXPECT_EQ(expand_grid({}).size(), 1u);
  const auto points = expand_grid({{"h", {"4", "8"}}, {"k", {"1", "2", "3"}}});
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(format_params(points[0]), "h=4,k=1");
  EXPECT_EQ(format_params(points[1]), "h=4,k=2");
  EXPECT_EQ(format_params(points[5]), "h=8,k=3");
  EXPECT_THROW(method_parameters("nearest"), std::invalid_argument);
}

TEST(MakeDater, ParameterErrorsNameTheKey) {
  TrainingContext ctx(corpus(50));
  try {
    make_dater("mp", {{"h", "wide"}}, ctx);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("mp.h"), std::string::npos) << e.what();
  }
  EXPECT_THROW(make_dater("mp", {{"colour", "red"}}, ctx), std::invalid_argument);
  EXPECT_THROW(make_dater("astrology", {}, ctx), std::invalid_argument);
}

TEST(DateDocuments, FallbacksGetTheMedian) {
  auto train = corpus(80);
  TrainingContext ctx(train);
  const auto dater = make_dater("mp", {{"k", "1"}}, ctx);
  std::vector<Document> docs{train[0], Document{"alien", 1200, {"zzz", "yyy"}}};
  const auto results = date_documents(dater, docs, 1234.5, 2);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_FALSE(results[0].fallback);
  EXPECT_TRUE(results[1].fallback);
  EXPECT_EQ(results[1].estimate, 1234.5);
  EXPECT_EQ(results[1].abs_error, 34.5);
}

TEST(Protocol, ReportsEveryMethodAndBlend) {
  const auto docs = corpus(300);
  ProtocolOptions opt;
  opt.grids["mp"] = {{"k", {"1"}}, {"h", {"6", "12"}}};
  opt.grids["knn"] = {{"k", {"1"}}};
  opt.grids["qr"] = {{"h", {"20"}}, {"min_mass", {"5"}}};
  opt.workers = 2;
  const auto r = run_protocol(docs, opt);
  EXPECT_TRUE(r.failures.empty()) << r.failures.front();
  EXPECT_EQ(r.train_size + r.validation_size + r.test_size, docs.size());
  for (const auto& m : method_names()) {
    ASSERT_NE(find(r, m, "val"), nullptr) << m;
    ASSERT_NE(find(r, m, "test"), nullptr) << m;
    EXPECT_EQ(find(r, m, "test")->per_doc.size(), r.test_size);
  }
  ASSERT_TRUE(r.blend.has_value());
  EXPECT_EQ(r.blend_methods, method_names());
  ASSERT_NE(find(r, "blend", "test"), nullptr);
  // Two regimes are easy to tell apart.
  EXPECT_LT(find(r, "mp", "test")->metrics.mae, 40.0);

  std::size_t mp_points = 0;
  for (const auto& g : r.grid_scores) mp_points += g.method == "mp";
  EXPECT_EQ(mp_points, 2u);
}

TEST(Protocol, DeterministicForSeed) {
  const auto docs = corpus(200);
  ProtocolOptions opt;
  opt.methods = {"mp", "mt"};
  opt.grids["mp"] = {{"k", {"1"}}};
  opt.seed = 9;
  opt.workers = 3;
  const auto a = run_protocol(docs, opt);
  opt.workers = 1;
  const auto b = run_protocol(docs, opt);
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    ASSERT_EQ(a.reports[i].params, b.reports[i].params);
    ASSERT_EQ(a.reports[i].per_doc.size(), b.reports[i].per_doc.size());
    for (std::size_t j = 0; j < a.reports[i].per_doc.size(); ++j) {
      ASSERT_EQ(a.reports[i].per_doc[j].id, b.reports[i].per_doc[j].id);
      ASSERT_EQ(a.reports[i].per_doc[j].estimate, b.reports[i].per_doc[j].estimate);
    }
  }
  opt.seed = 10;
  const auto c = run_protocol(docs, opt);
  EXPECT_NE(c.reports[0].per_doc[0].id + c.reports[0].per_doc[1].id,
            a.reports[0].per_doc[0].id + a.reports[0].per_doc[1].id);
}

TEST(Protocol, GridTiesGoToFirstPoint) {
  const auto docs = corpus(150);
  ProtocolOptions opt;
  opt.methods = {"mt"};
  // Equal values in different spellings date identically.
  opt.grids["mt"] = {{"threshold", {"0.0", "0", "0.00"}}};
  const auto r = run_protocol(docs, opt);
  ASSERT_EQ(r.grid_scores.size(), 3u);
  EXPECT_EQ(r.grid_scores[0].validation_mae, r.grid_scores[2].validation_mae);
  EXPECT_EQ(find(r, "mt", "val")->params, "threshold=0.0");
  EXPECT_FALSE(r.blend.has_value());
}

TEST(Protocol, FailuresAreIsolated) {
  const auto docs = corpus(150);
  ProtocolOptions opt;
  opt.methods = {"mp", "mt"};
  // No document has 1000 tokens, so the shingle index cannot be built.
  opt.grids["mp"] = {{"k", {"1000"}}};
  const auto r = run_protocol(docs, opt);
  ASSERT_NE(find(r, "mt", "test"), nullptr);
  const auto* mp = find(r, "mp", "val");
  EXPECT_TRUE(r.failures.size() == 1 || (mp && mp->fallbacks == mp->per_doc.size()));
}

TEST(Protocol, MergedKnnReport) {
  const auto docs = corpus(150);
  ProtocolOptions opt;
  opt.methods = {"knn"};
  opt.grids["knn"] = {{"k", {"1"}}};
  opt.merge_knn_validation = true;
  const auto r = run_protocol(docs, opt);
  const auto* merged = find(r, "knn", "val+test");
  ASSERT_NE(merged, nullptr);
  EXPECT_EQ(merged->per_doc.size(), r.validation_size + r.test_size);
}

TEST(Protocol, InvalidGridsThrow) {
  const auto docs = corpus(60);
  ProtocolOptions opt;
  opt.methods = {"mp"};
  opt.grids["mt"] = {{"threshold", {"1"}}};
  EXPECT_THROW(run_protocol(docs, opt), std::invalid_argument);
  opt.grids.clear();
  opt.grids["mp"] = {{"bandwidth", {"1"}}};
  EXPECT_THROW(run_protocol(docs, opt), std::invalid_argument);
  opt.grids["mp"] = {{"h", {"-1"}}};
  EXPECT_THROW(run_protocol(docs, opt), std::invalid_argument);
}

}  // namespace
}  // namespace chartdate
