#include <gtest/gtest.h>

#include <sstream>

#include "screening/cli.hpp"
#include "screening/experiment.hpp"
#include "test_support.hpp"

namespace screening {
namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "screen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json config_for(const std::filesystem::path& out_dir) {
  auto j = Json::parse(R"({
    "name": "small",
    "synthetic": {"size": 600, "negatives_per_positive": 5, "seed": 3},
    "featurizer": {"hash_dim": 4096, "ngram_orders": [1]},
    "architecture": {"kind": "cascade", "model": {"learning_rate": 1.0, "epochs": 4}},
    "k": 3, "seed": 5, "recall_targets": [0.9]
  })");
  j["output_dir"] = out_dir.string();
  return j;
}

Json without_timestamp(const std::filesystem::path& report) {
  auto j = Json::parse(testing::read_file(report));
  j.erase("generated_at");
  return j;
}

TEST(Cli, RunSingleExperimentWritesReport) {
  testing::TempDir dir("cli_run");
  testing::write_file(dir / "c.json", config_for(dir / "out").dump());
  const auto r = cli({"run", "--config", (dir / "c.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("small: P="), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report_small.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "report_small.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "folds_small.csv"));
  const auto report = report_from_json(Json::parse(testing::read_file(dir / "out" / "report_small.json")));
  EXPECT_EQ(report.kind, ArchitectureKind::Cascade);
  EXPECT_EQ(report.pooled.total(), 600u);
}

TEST(Cli, RunIsDeterministicApartFromTimestamp) {
  testing::TempDir dir("cli_det");
  testing::write_file(dir / "c.json", config_for(dir / "a").dump());
  ASSERT_EQ(cli({"run", "--config", (dir / "c.json").string()}).code, 0);
  ASSERT_EQ(cli({"run", "--config", (dir / "c.json").string(), "--out", (dir / "b").string(), "--jobs", "2"}).code,
            0);
  EXPECT_EQ(without_timestamp(dir / "a" / "report_small.json"), without_timestamp(dir / "b" / "report_small.json"));
  ASSERT_EQ(cli({"run", "--config", (dir / "c.json").string(), "--out", (dir / "c").string(), "--seed", "6"}).code,
            0);
  EXPECT_NE(without_timestamp(dir / "a" / "report_small.json"), without_timestamp(dir / "c" / "report_small.json"));
}

TEST(Cli, GridWritesReportsAndComparison) {
  testing::TempDir dir("cli_grid");
  auto j = config_for(dir / "grid");
  j["architecture"]["model"]["hidden_dim"] = 4;
  j["experiments"] = Json::parse(R"([
    {"name": "itl", "architecture": {"kind": "itl"}},
    {"name": "cascade", "architecture": {"kind": "cascade"}},
    {"name": "boolean", "architecture": {"kind": "boolean"}},
    {"name": "ffn", "architecture": {"kind": "ffn", "model_kind": "mlp", "combiner": {"train": {"epochs": 1, "hidden_dim": 4}}}}
  ])");
  testing::write_file(dir / "c.json", j.dump());
  const auto r = cli({"run", "--config", (dir / "c.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const std::string name : {"itl", "cascade", "boolean", "ffn"})
    EXPECT_TRUE(std::filesystem::exists(dir / "grid" / name / ("report_" + name + ".json"))) << name;
  const auto cmp = Json::parse(testing::read_file(dir / "grid" / "comparison.json"));
  ASSERT_EQ(cmp.size(), 4u);
  EXPECT_EQ(cmp[3]["architecture"], "ffn");
  EXPECT_TRUE(std::filesystem::exists(dir / "grid" / "comparison.txt"));
}

// Metrics are recomputed from pooled counts on load, so the counts carry P and R
// exactly: P = p_num / p_den, R = r_num / r_den.
void write_fake_report(const std::filesystem::path& path, const std::string& name, std::size_t p_num,
                       std::size_t p_den, std::size_t r_num, std::size_t r_den) {
  EvalReport rep;
  rep.name = name;
  rep.configuration = "cfg";
  const std::size_t tp = p_num * r_num;
  rep.pooled = {tp, p_den * r_num - tp, r_den * p_num - tp, 1000};
  rep.metrics = prf(rep.pooled);
  testing::write_file(path, report_to_json(rep).dump());
}

TEST(Cli, CompareAgainstShippedBaselines) {
  testing::TempDir dir("cli_cmp");
  write_fake_report(dir / "r.json", "cascade", 6551, 10000, 8783, 10000);
  const auto baselines = (testing::source_dir() / "data" / "baselines.json").string();
  const auto r = cli({"compare", (dir / "r.json").string(), "--baselines", baselines, "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("49.1%"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("0.3462"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "comparison.json"));
  EXPECT_EQ(testing::read_file(dir / "comparison.txt"), r.out);
}

TEST(Cli, CompareSelfIsZero) {
  testing::TempDir dir("cli_self");
  write_fake_report(dir / "r.json", "x", 1, 2, 4, 5);
  testing::write_file(dir / "b.json", R"([{"name":"x","precision":0.5,"recall":0.8}])");
  const auto r = cli({"compare", (dir / "r.json").string(), "--baselines", (dir / "b.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.0%"), std::string::npos) << r.out;
}

TEST(Cli, FetchFromFixtures) {
  testing::TempDir dir("cli_fetch");
  const auto fixtures = (testing::source_dir() / "tests" / "fixtures" / "pubmed").string();
  testing::write_file(dir / "ids.txt", "31000001\n31000002\n31000003\n");
  testing::write_file(dir / "r.jsonl",
                      R"({"id":"31000001","format":"original","hhc":"true","purpose":"treatment","rigor":"true"})"
                      "\n");
  auto r = cli({"fetch", "--ids", (dir / "ids.txt").string(), "--out", (dir / "c.jsonl").string(), "--fixtures",
                fixtures, "--sidecar", (dir / "r.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_lines(dir / "c.jsonl").size(), 3u);
  const auto corpus = load_corpus(dir / "c.jsonl", StopRule::clinical_hedges());
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].ratings.rigor, TriState::True);
  EXPECT_EQ(corpus[1].ratings, CriterionRatings{});
  EXPECT_EQ(testing::read_file(dir / "c.jsonl.failures.jsonl"), "");

  testing::write_file(dir / "ids2.txt", "31000001\n31000005\n31000003\n");
  r = cli({"fetch", "--ids", (dir / "ids2.txt").string(), "--out", (dir / "d.jsonl").string(), "--fixtures",
           fixtures});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(testing::read_lines(dir / "d.jsonl").size(), 2u);
  const auto failures = testing::read_lines(dir / "d.jsonl.failures.jsonl");
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(Json::parse(failures[0])["id"], "31000005");
  EXPECT_NE(r.err.find("failed 31000005"), std::string::npos);
}

TEST(Cli, SynthThenStats) {
  testing::TempDir dir("cli_synth");
  auto r = cli({"synth", "--n", "330", "--ratio", "32", "--seed", "2", "--out", (dir / "s.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 330 articles (10 positive)"), std::string::npos) << r.out;
  r = cli({"stats", "--corpus", (dir / "s.jsonl").string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["full"]["positive"], 10);
  EXPECT_EQ(j["full"]["total"], 330);
  EXPECT_EQ(j["length"]["count"], 330);
  r = cli({"stats", "--corpus", (dir / "s.jsonl").string()});
  EXPECT_NE(r.out.find("Length (words)"), std::string::npos);
}

TEST(Cli, ErrorsReportCategoryAndCode) {
  auto r = cli({"run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error[usage]:", 0), 0u) << r.err;
  r = cli({"bogus"});
  EXPECT_EQ(r.code, 2);
  r = cli({"stats", "--corpus", "/nonexistent/corpus.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error[", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  r = cli({"synth", "--signal", "1,2", "--out", "/tmp/x.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[config]"), std::string::npos) << r.err;
  r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("fetch"), std::string::npos);
}

}  // namespace
}  // namespace screening
