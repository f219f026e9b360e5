#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chartdate/corpus.hpp"
#include "chartdate/synthetic.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;

namespace chartdate {
namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("chartdate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) { std::ofstream(path(name)) << text; }

  // Two-regime corpus for the dating commands.
  std::string synth_corpus(std::size_t n) {
    const std::string p = path("corpus.jsonl");
    EXPECT_EQ(run({"synth", "--kind", "two_regime", "--n", std::to_string(n), "--seed", "4", "--out", p}), 0)
        << err_.str();
    return p;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, PreprocessEmptyFileWarns) {
  write("empty.jsonl", "");
  EXPECT_EQ(run({"preprocess", path("empty.jsonl"), path("out.jsonl")}), 0);
  EXPECT_NE(err_.str().find("warning: no documents"), std::string::npos);
  EXPECT_EQ(slurp(path("out.jsonl")), "");
}

TEST_F(CliTest, PreprocessCharter) {
  std::ifstream in(std::string(CHARTDATE_TEST_DATA) + "/sample_charter.txt");
  std::stringstream text;
  text << in.rdbuf();
  {
    std::ofstream raw(path("raw.jsonl"));
    const std::vector<RawDocument> docs{{"charter", 1230, text.str()}};
    write_raw_jsonl(raw, docs);
  }
  ASSERT_EQ(run({"preprocess", path("raw.jsonl"), path("tok.jsonl")}), 0) << err_.str();
  EXPECT_NE(err_.str().find("charter\t190 tokens"), std::string::npos) << err_.str();
  const auto docs = load_documents(path("tok.jsonl"));
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].tokens.size(), 190u);
  EXPECT_EQ(docs[0].year, 1230);
}

TEST_F(CliTest, PreprocessDuplicateIdIsDataError) {
  write("dup.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_EQ(run({"preprocess", path("dup.jsonl"), path("out.jsonl")}), 3);
  write("bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\nnot json\n");
  EXPECT_EQ(run({"preprocess", path("bad.jsonl"), path("out.jsonl")}), 0);
  EXPECT_NE(err_.str().find(":2:"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"preprocess", "--strict", path("bad.jsonl"), path("out.jsonl")}), 3);
  EXPECT_EQ(run({"preprocess", path("missing.jsonl"), path("out.jsonl")}), 3);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  const auto corpus = synth_corpus(60);
  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "astrology"}), 2);
  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "mp", "--param", "h"}), 2);
  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "mp", "--param", "h=soon"}), 2);
  EXPECT_EQ(run({"evaluate", "--corpus", corpus, "--grid", "mp.h"}), 2);
  EXPECT_EQ(run({"evaluate", "--corpus", corpus, "--grid", "mp.bandwidth=1,2"}), 2);
  EXPECT_NE(err_.str().find("--grid"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--corpus", corpus, "--methods", "mp", "--grid", "mp.h=1,,2"}), 2);
  EXPECT_EQ(run({"evaluate", "--corpus", corpus, "--methods", "mp", "--grid", "mp.h=-3"}), 2);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, DateWritesRowsAndCurves) {
  const auto corpus = synth_corpus(150);
  write("targets.jsonl", "{\"id\":\"t/1\",\"text\":\"w0000 w0002 w0004 w0006\"}\n"
                         "{\"id\":\"t2\",\"text\":\"nothing known here\"}\n");
  ASSERT_EQ(run({"date", "--corpus", corpus, "--targets", path("targets.jsonl"), "--method", "mp", "--param", "k=1",
                 "--emit-curves", path("curves")}),
            0)
      << err_.str();
  std::istringstream lines(out_.str());
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "id\tyear_hat\tstderr\tflags");
  EXPECT_EQ(first.rfind("t/1\t", 0), 0u);
  EXPECT_EQ(second, "t2\tNA\tNA\tundatable");
  std::size_t csvs = 0;
  for (const auto& entry : fs::directory_iterator(path("curves"))) {
    ++csvs;
    EXPECT_EQ(slurp(entry.path().string()).rfind("year,value\n", 0), 0u);
  }
  EXPECT_EQ(csvs, 1u);

  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", path("targets.jsonl"), "--method", "mp", "--param", "k=1",
                 "--strict"}),
            3);
}

TEST_F(CliTest, DateBlend) {
  const auto corpus = synth_corpus(200);
  ASSERT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "blend", "--blend-methods", "mp,mt",
                 "--param", "mp.k=1", "--out", path("dates.tsv")}),
            0)
      << err_.str();
  EXPECT_NE(err_.str().find("blend weights: mp="), std::string::npos);
  const auto text = slurp(path("dates.tsv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 201);
  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "blend", "--param", "k=1"}), 2);
  EXPECT_EQ(run({"date", "--corpus", corpus, "--targets", corpus, "--method", "blend", "--blend-methods", "mp"}), 2);
}

TEST_F(CliTest, EvaluateIsDeterministic) {
  const auto corpus = synth_corpus(200);
  const std::vector<std::string> base{"evaluate", "--corpus", corpus, "--methods", "mp,mt", "--grid", "mp.k=1",
                                      "--grid", "mp.h=6,12", "--seed", "3"};
  auto args = base;
  args.insert(args.end(), {"--out-dir", path("a")});
  ASSERT_EQ(run(args), 0) << err_.str();
  const std::string table = out_.str();
  EXPECT_NE(table.find("blend"), std::string::npos);
  args = base;
  args.insert(args.end(), {"--out-dir", path("b"), "--workers", "1"});
  ASSERT_EQ(run(args), 0);
  EXPECT_EQ(out_.str(), table);
  for (const char* f : {"summary.tsv", "per_doc.tsv", "grid.tsv", "table.txt"})
    EXPECT_EQ(slurp(path("a") + "/" + f), slurp(path("b") + "/" + f)) << f;
  const auto grid = slurp(path("a") + "/grid.tsv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 4);  // header, 2 mp, 1 mt
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  const auto corpus = synth_corpus(100);
  write("run.ini", "[date]\nmethod = mt\n");
  ASSERT_EQ(run({"--config", path("run.ini"), "date", "--corpus", corpus, "--targets", corpus}), 0) << err_.str();
  EXPECT_NE(out_.str().find("synth-000000\t"), std::string::npos);
}

TEST_F(CliTest, Synth) {
  ASSERT_EQ(run({"synth", "--n", "0", "--out", path("none.jsonl")}), 0);
  EXPECT_EQ(slurp(path("none.jsonl")), "");
  ASSERT_EQ(run({"synth", "--n", "20", "--seed", "1", "--out", path("a.jsonl")}), 0);
  ASSERT_EQ(run({"synth", "--n", "20", "--seed", "2", "--out", path("b.jsonl")}), 0);
  ASSERT_EQ(run({"synth", "--n", "20", "--seed", "1", "--out", path("c.jsonl")}), 0);
  EXPECT_NE(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("c.jsonl")));
  write("model.cfg", "kind = two_regime\nvocabulary = 30\n");
  EXPECT_EQ(run({"synth", "--model", path("model.cfg"), "--n", "5", "--out", path("m.jsonl")}), 0);
  write("bad.cfg", "colour = red\n");
  EXPECT_EQ(run({"synth", "--model", path("bad.cfg"), "--n", "5", "--out", path("m.jsonl")}), 3);
  EXPECT_EQ(run({"synth", "--kind", "nonsense", "--n", "5", "--out", path("m.jsonl")}), 3);
}

}  // namespace
}  // namespace chartdate
