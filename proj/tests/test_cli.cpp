#include <gtest/gtest.h>

#include <filesystem>
#include <sys/wait.h>

#include "uam/json_io.hpp"

using namespace uam;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("uam_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(UAM_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenerateAndPool) {
  ASSERT_EQ(run("gen-demands --n 40 --seed 3 --out " + path("d.json")), 0);
  ASSERT_EQ(run("pool --demands " + path("d.json") + " --beam-width 1000 --out " + path("p.json")), 0);
  const auto doc = load_json(path("p.json"));
  EXPECT_EQ(doc.at("schema_version"), kSchemaVersion);
  const auto sol = read_document<PoolingSolution>(doc, "pooling_solution", "solution");
  EXPECT_EQ(Json(sol), doc.at("solution"));
  const auto manifest = load_json(path("p.json.manifest.json"));
  EXPECT_EQ(manifest.at("subcommand"), "pool");
  EXPECT_EQ(manifest.at("parameters").at("beam-width"), "1000");
  EXPECT_EQ(manifest.at("inputs").at(0), path("d.json"));
}

TEST_F(Cli, SameSeedSameOutput) {
  ASSERT_EQ(run("gen-infra --aircraft 3 --vertiports 4 --scenario i --seed 9 --out " + path("a.json")), 0);
  ASSERT_EQ(run("gen-infra --aircraft 3 --vertiports 4 --scenario i --seed 9 --out " + path("b.json")), 0);
  EXPECT_EQ(load_json(path("a.json")), load_json(path("b.json")));
  ASSERT_EQ(run("route --instance " + path("a.json") + " --max-iterations 30 --budget 100 --seed 4 --out " + path("r1.json")), run("route --instance " + path("a.json") + " --max-iterations 30 --budget 100 --seed 4 --out " + path("r2.json")));
  EXPECT_EQ(load_json(path("r1.json")).at("solution"), load_json(path("r2.json")).at("solution"));
}

TEST_F(Cli, RouteReportsMetrics) {
  ASSERT_EQ(run("gen-infra --aircraft 3 --vertiports 3 --scenario low --seed 2 --out " + path("i.json")), 0);
  const int code = run("route --instance " + path("i.json") + " --budget 2 --seed 7 --out " + path("r.json"));
  EXPECT_TRUE(code == 0 || code == 1);
  const auto doc = load_json(path("r.json"));
  const auto inst = read_document<RoutingInstance>(load_json(path("i.json")), "routing_instance", "instance");
  const auto sol = read_document<RoutingSolution>(doc, "routing_solution", "solution");
  EXPECT_EQ(code == 0, sol.unserved.empty());
  EXPECT_EQ(doc.at("metrics").at("total"), inst.requests.size());
}

TEST_F(Cli, ExactOraclesAndRefusal) {
  ASSERT_EQ(run("gen-demands --n 15 --seed 1 --out " + path("d15.json")), 0);
  EXPECT_EQ(run("exact-pool --demands " + path("d15.json") + " --out " + path("x.json")), 2);
  ASSERT_EQ(run("gen-demands --n 8 --seed 1 --out " + path("d8.json")), 0);
  EXPECT_EQ(run("pool --exact --demands " + path("d8.json") + " --out " + path("x8.json")), 0);
  ASSERT_EQ(run("gen-infra --aircraft 2 --vertiports 2 --requests 4 --seed 1 --out " + path("t.json")), 0);
  const int code = run("exact-route --instance " + path("t.json") + " --out " + path("tr.json"));
  EXPECT_TRUE(code == 0 || code == 1);
  EXPECT_EQ(load_json(path("tr.json")).at("method"), "exact");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("pool --demands"), 2);
  EXPECT_EQ(run("pool --demands " + path("missing.json") + " --out " + path("o.json")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  ASSERT_EQ(run("gen-demands --n 5 --out " + path("d.json")), 0);
  EXPECT_EQ(run("route --instance " + path("d.json") + " --out " + path("o.json")), 2);
  EXPECT_EQ(run("bench-routing --scenarios 3y3l --csv " + path("c.csv") + " --out " + path("o.json")), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, PipelineWritesEveryStage) {
  const int code = run("pipeline --aircraft 3 --vertiports 3 --n 20 --budget 1 --seed 5 --out-dir " + path("pipe"));
  EXPECT_TRUE(code == 0 || code == 1);
  for (const char* f : {"bookings.json", "pooling.json", "instance.json", "routing.json", "run.manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / "pipe" / f)) << f;
}

TEST_F(Cli, OnlineDecision) {
  const int code = run("online --aircraft 3 --vertiports 3 --initial 6 --budget 1 --bootstrap-budget 1 --seed 2 --out " +
                       path("on.json"));
  ASSERT_TRUE(code == 0 || code == 1);
  const auto doc = load_json(path("on.json"));
  EXPECT_EQ(doc.at("accepted").get<bool>(), code == 0);
  EXPECT_EQ(doc.at("session").at("kind"), "online_session");
}

TEST_F(Cli, ExperimentDrivers) {
  EXPECT_EQ(run("bench-pooling --sizes 10 --reps 2 --jobs 2 --csv " + path("bp.csv") + " --out " + path("bp.json")), 0);
  EXPECT_EQ(run("bench-routing --scenarios 2x2l --reps 2 --budget 0.2 --jobs 2 --csv " + path("br.csv") + " --out " +
                path("br.json")),
            0);
  EXPECT_EQ(run("fairness --reps 1 --n 20 --shares 0.5 --alphas 0 --alphas 1 --csv " + path("f.csv") + " --out " +
                path("f.json")),
            0);
  EXPECT_EQ(run("sweep --reps 1 --n 20 --t-premium 15 --alphas 1 --csv " + path("s.csv") + " --out " + path("s.json")),
            0);
  for (const char* f : {"bp.csv", "br.csv", "f.csv", "s.csv", "bp.json.manifest.json", "s.json.manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  std::ifstream csv(path("s.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t_premium,alpha_regular,regular_mean_wait,premium_mean_wait");
}
