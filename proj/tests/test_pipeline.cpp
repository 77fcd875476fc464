#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include "serpeval/pipeline.hpp"
#include "support/fixture_server.hpp"
#include "support/synthetic.hpp"

using namespace serpeval;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class PipelineCli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = testsupport::temp_dir("pipeline");
    server.set("/a", testsupport::page("Solar", "the solar wind blows"));
    server.set("/b", testsupport::page("Wind", "wind and more wind"));
    server.set("/c", testsupport::page("Shop", "buy shoes today"));
    std::filesystem::create_directories(dir / "fx");
    std::ofstream out(dir / "fx" / "q1.ndjson");
    for (const char* path : {"/a", "/b", "/c", "/a", "/dead"})
      out << json{{"url", server.url(path)}, {"title", path}}.dump() << '\n';
    out.close();
    write_config(json::object());
  }
  void TearDown() override { std::filesystem::remove_all(dir); }

  void write_config(const json& overrides) {
    json config = {
        {"root", "data"},
        {"run_id", "r1"},
        {"results_per_query", 5},
        {"engines", {{{"id", "ea"}, {"dir", "fx"}}, {{"id", "eb"}, {"dir", "fx"}}}},
        {"topics", {{{"id", "t1"}, {"label", "Weather"}, {"queries", {{{"id", "q1"}, {"text", "solar wind"}}}}}}},
        {"fetch", {{"host_interval_ms", 0}, {"query_backoff_ms", 1}}},
        {"probe", {{"retry_delay_ms", 1}}}};
    config.merge_patch(overrides);
    std::ofstream(dir / "serpeval.json") << config.dump(2);
  }

  Outcome cli(const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string(SERPEVAL_CLI_PATH) + " -c " + (dir / "serpeval.json").string() + " " +
                            args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = slurp(out);
    o.err = slurp(err);
    return o;
  }

  std::filesystem::path run_dir() const { return dir / "data" / "r1"; }

  std::filesystem::path dir;
  testsupport::FixtureServer server;
};

}  // namespace

TEST_F(PipelineCli, RunCreatesTheRunDirectory) {
  auto o = cli("run");
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(std::filesystem::exists(run_dir() / "manifest"));
  RunStore store(dir / "data");
  auto run = store.load_run("r1");
  EXPECT_EQ(run.triplet_count(), 10u);
  EXPECT_TRUE(run.gaps.empty());
  EXPECT_NE(o.err.find("2 pages not fetched"), std::string::npos) << o.err;
}

TEST_F(PipelineCli, ExistingRunIsRefusedWithoutForce) {
  ASSERT_EQ(cli("run").code, 0);
  auto again = cli("run");
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("already exists"), std::string::npos);
  EXPECT_EQ(cli("run --force").code, 0);
}

TEST_F(PipelineCli, UnknownAdapterModeIsAConfigError) {
  write_config({{"engines", {{{"id", "ea"}, {"mode", "carrier-pigeon"}}}}});
  auto o = cli("run");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("carrier-pigeon"), std::string::npos) << o.err;
  EXPECT_FALSE(std::filesystem::exists(run_dir()));
}

TEST_F(PipelineCli, StagesMustRunInOrder) {
  auto early = cli("probe");
  EXPECT_EQ(early.code, 3);
  ASSERT_EQ(cli("run").code, 0);
  auto report = cli("report");
  EXPECT_EQ(report.code, 3);
  EXPECT_NE(report.err.find("probe"), std::string::npos) << report.err;
  ASSERT_EQ(cli("probe").code, 0);
  auto still = cli("report");
  EXPECT_EQ(still.code, 3);
  EXPECT_NE(still.err.find("score"), std::string::npos) << still.err;
}

TEST_F(PipelineCli, FullPipelineWritesArtifacts) {
  ASSERT_EQ(cli("run").code, 0);
  ASSERT_EQ(cli("probe").code, 0);
  ASSERT_EQ(cli("score").code, 0);
  auto o = cli("report --format csv");
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"probe_report.ndjson", "relevance_scores.ndjson", "reports/table_performance.csv",
                        "reports/table_user.csv", "reports/table_query.csv", "reports/table_final.csv",
                        "reports/final.json"})
    EXPECT_TRUE(std::filesystem::exists(run_dir() / f)) << f;

  auto perf = table_from_csv(slurp(run_dir() / "reports/table_performance.csv"));
  EXPECT_DOUBLE_EQ(*perf.cell("ea", "Dead Links"), 20.0);
  EXPECT_DOUBLE_EQ(*perf.cell("ea", "Redundant Results"), 20.0);
  EXPECT_DOUBLE_EQ(*perf.cell("ea", "Parasites Pages"), 20.0);

  EXPECT_EQ(cli("report --format png").code, 0);
  EXPECT_TRUE(std::filesystem::exists(run_dir() / "reports/table_final.png"));
  EXPECT_EQ(cli("report --locale fr --format csv").code, 0);
  EXPECT_NE(slurp(run_dir() / "reports/table_performance.csv").find("20,00"), std::string::npos);
}

TEST_F(PipelineCli, UnitWeightsProjectOntoTheSystemLevel) {
  ASSERT_EQ(cli("run").code, 0);
  ASSERT_EQ(cli("probe").code, 0);
  ASSERT_EQ(cli("score").code, 0);
  auto o = cli("report --weights 1,0,0");
  ASSERT_EQ(o.code, 0) << o.err;
  auto final = json::parse(slurp(run_dir() / "reports/final.json"));
  ASSERT_EQ(final.size(), 2u);
  for (const auto& e : final) {
    EXPECT_EQ(e["coupled_score"].get<double>(), e["system"].get<double>());
    EXPECT_NEAR(e["system"].get<double>(), 1.0 - 60.0 / 300.0, 1e-12);
  }
  EXPECT_NE(o.out.find("ea\t0.8"), std::string::npos) << o.out;
}

TEST_F(PipelineCli, WeightsThatStrandEveryLevelExitTwo) {
  ASSERT_EQ(cli("run").code, 0);
  ASSERT_EQ(cli("probe").code, 0);
  ASSERT_EQ(cli("score").code, 0);
  EXPECT_EQ(cli("report --weights 0,0,1").code, 2);
  EXPECT_EQ(cli("report --weights nope").code, 2);
  EXPECT_EQ(cli("report --format pdf").code, 2);
}

TEST_F(PipelineCli, MissingConfigFile) {
  const std::string cmd = std::string(SERPEVAL_CLI_PATH) + " -c " + (dir / "absent.json").string() +
                          " run >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
