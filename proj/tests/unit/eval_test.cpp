#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chartdate/eval.hpp"
#include "generators.hpp"

namespace chartdate {
namespace {

TEST(ErrorMetrics, Examples) {
  const std::vector<double> truth{1200, 1200};
  const std::vector<double> est{1203, 1196};
  const auto m = error_metrics(truth, est);
  EXPECT_DOUBLE_EQ(m.rmse, std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(m.mae, 3.5);
  EXPECT_DOUBLE_EQ(m.medae, 3.5);

  const auto odd = error_metrics(std::vector<double>{0, 0, 0}, std::vector<double>{1, -10, 2});
  EXPECT_DOUBLE_EQ(odd.medae, 2.0);
  EXPECT_DOUBLE_EQ(odd.mae, 13.0 / 3.0);

  EXPECT_THROW(error_metrics({}, {}), std::invalid_argument);
  EXPECT_THROW(error_metrics(truth, std::vector<double>{1}), std::invalid_argument);
}

TEST(ErrorMetricsProperty, OrderingAndShift) {
  testing::Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = testing::uniform_int(rng, 1, 50);
    std::vector<double> t, e, shifted_t, shifted_e;
    for (int i = 0; i < n; ++i) {
      t.push_back(testing::uniform_int(rng, 1100, 1300));
      e.push_back(t.back() + testing::uniform_real(rng, -60, 60));
      shifted_t.push_back(t.back() + 17);
      shifted_e.push_back(e.back() + 17);
    }
    const auto m = error_metrics(t, e);
    ASSERT_GE(m.rmse, m.mae * (1 - 1e-12));
    ASSERT_GE(m.mae, 0.0);
    ASSERT_GE(m.medae, 0.0);
    const auto s = error_metrics(shifted_t, shifted_e);
    ASSERT_NEAR(s.mae, m.mae, 1e-9);
    ASSERT_NEAR(s.rmse, m.rmse, 1e-9);
  }
}

std::vector<DocResult> docs(std::vector<std::pair<double, double>> rows) {
  std::vector<DocResult> out;
  int i = 0;
  for (auto [t, e] : rows) out.push_back({"d" + std::to_string(i++), t, e, std::abs(e - t), i == 1});
  return out;
}

TEST(Reports, SummaryAndPerDocFormats) {
  std::vector<EvalReport> reports{make_report("mp", "h=12", "val", docs({{1200, 1210}, {1250, 1248}})),
                                  make_report("mp", "h=12", "test", docs({{1200, 1201}}))};
  EXPECT_EQ(reports[0].fallbacks, 1u);
  EXPECT_DOUBLE_EQ(reports[0].metrics.mae, 6.0);

  std::ostringstream summary;
  write_summary_tsv(summary, reports);
  EXPECT_EQ(summary.str(),
            "method\tparams\tsplit\tn\tfallbacks\trmse\tmae\tmedae\n"
            "mp\th=12\tval\t2\t1\t7.2111\t6\t6\n"
            "mp\th=12\ttest\t1\t1\t1\t1\t1\n");

  std::ostringstream per_doc;
  write_per_doc_tsv(per_doc, reports);
  EXPECT_EQ(per_doc.str(),
            "method\tparams\tsplit\tid\ttruth\testimate\tabs_error\tfallback\n"
            "mp\th=12\tval\td0\t1200\t1210\t10\t1\n"
            "mp\th=12\tval\td1\t1250\t1248\t2\t0\n"
            "mp\th=12\ttest\td0\t1200\t1201\t1\t1\n");
}

TEST(Reports, TablePairsSplits) {
  std::vector<EvalReport> reports{make_report("knn", "", "val", docs({{1200, 1204}})),
                                  make_report("mp", "h=12", "val", docs({{1200, 1210}})),
                                  make_report("mp", "h=12", "test", docs({{1200, 1201}}))};
  std::ostringstream table;
  write_table(table, reports);
  EXPECT_EQ(table.str(),
            "method  params  splits     rmse   mae    medae\n"
            "knn     -       val        4      4      4\n"
            "mp      h=12    val, test  10, 1  10, 1  10, 1\n");
}

TEST(FormatNumber, SixSignificantDigits) {
  EXPECT_EQ(format_number(1253.4), "1253.4");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_number(1234567.0), "1.23457e+06");
}

}  // namespace
}  // namespace chartdate
