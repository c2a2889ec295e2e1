#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "asv/ddpg.hpp"
#include "asv/experiment.hpp"
#include "support.hpp"

using namespace asv;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(ASV_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path config_path(const char* name) { return fs::path(ASV_SOURCE_DIR) / "configs" / name; }

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("evaluate --config /nonexistent.cfg").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, ConfigErrorsExitOne) {
  const auto dir = asv::testing::scratch_dir("cli_cfg");
  EXPECT_EQ(cli("evaluate --out-dir " + dir.string() + " --set nmpc.horizon=0").code, 1);
  EXPECT_EQ(cli("evaluate --out-dir " + dir.string() + " --controller drl --checkpoint /nonexistent.ckpt").code, 1);
  EXPECT_EQ(cli("evaluate --out-dir " + dir.string() + " --set bogus").code, 1);
  EXPECT_EQ(cli("train --out-dir " + dir.string() + " --set ddpg.gamma=2").code, 1);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  const auto dir = asv::testing::scratch_dir("cli_runtime");
  {
    std::ofstream f(dir / "garbage.ckpt");
    f << "not a checkpoint";
  }
  EXPECT_EQ(cli("evaluate --out-dir " + dir.string() + " --controller drl --checkpoint " +
                (dir / "garbage.ckpt").string())
                .code,
            2);
}

TEST(Cli, ShippedConfigsLoadIntoEveryStage) {
  for (const char* name : {"default.cfg", "smoke.cfg", "nominal.cfg", "disturbed.cfg"}) {
    const KeyValueConfig cfg = KeyValueConfig::load(config_path(name));
    EXPECT_NO_THROW(TrainingConfig::from_config(cfg)) << name;
    KeyValueConfig eval = cfg;
    eval.set("evaluate.controller", "nmpc");
    EXPECT_NO_THROW(ExperimentSpec::from_config(eval)) << name;
  }
}

TEST(Cli, EvaluateWritesTracesMetricsManifestAndPlots) {
  const auto dir = asv::testing::scratch_dir("cli_eval");
  const CliRun r = cli("evaluate --config " + config_path("nominal.cfg").string() + " --out-dir " + dir.string() +
                    " --reps 2 --set trajectory.duration=5");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"manifest.json", "nmpc/metrics.json", "nmpc/trace_rep0.csv", "nmpc/trace_rep1.csv",
                        "plot_trajectory.py", "plot_error.py", "plot_thrust.py"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["seeds"].size(), 2u);
  EXPECT_EQ(manifest["config"]["trajectory.duration"], "5");

  // Same command again reproduces the traces byte for byte.
  const auto again = asv::testing::scratch_dir("cli_eval_again");
  ASSERT_EQ(cli("evaluate --config " + config_path("nominal.cfg").string() + " --out-dir " + again.string() +
                " --reps 2 --set trajectory.duration=5")
                .code,
            0);
  EXPECT_EQ(slurp(dir / "nmpc/trace_rep0.csv"), slurp(again / "nmpc/trace_rep0.csv"));
  EXPECT_EQ(slurp(dir / "nmpc/trace_rep1.csv"), slurp(again / "nmpc/trace_rep1.csv"));
}

TEST(Cli, MetricsSubcommandMatchesLibrary) {
  const auto dir = asv::testing::scratch_dir("cli_metrics");
  ASSERT_EQ(cli("evaluate --out-dir " + dir.string() + " --reps 1 --set trajectory.duration=4").code, 0);
  const fs::path trace = dir / "nmpc" / "trace_rep0.csv";
  const CliRun r = cli("metrics " + trace.string());
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const MetricsReport m = compute_metrics(read_trace_csv(trace));
  EXPECT_EQ(j[trace.string()]["rmse_e_p"].get<double>(), m.rmse_e_p);
  EXPECT_EQ(j[trace.string()]["e_ave"].get<double>(), m.e_ave);
  EXPECT_EQ(cli("metrics /nonexistent.csv").code, 1);
}

TEST(Cli, SimulateConstantThrust) {
  const auto dir = asv::testing::scratch_dir("cli_sim");
  const CliRun r = cli("simulate --out-dir " + dir.string() +
                    " --set disturbance.enabled=false --set trajectory.duration=3 --thrust 1 1 0 0");
  ASSERT_EQ(r.code, 0);
  const auto rows = read_trace_csv(dir / "trace_simulate.csv");
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) EXPECT_EQ(row.f, Eigen::Vector4d(1, 1, 0, 0));
  EXPECT_EQ(cli("simulate --out-dir " + dir.string() + " --thrust 1 2").code, 1);
}

TEST(Cli, TrainTinyBudget) {
  const auto dir = asv::testing::scratch_dir("cli_train");
  const CliRun r = cli("train --out-dir " + dir.string() + " --episodes 2 --set ddpg.hidden=8,8 --seed 3");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"policy.ckpt", "last.ckpt", "learning_curve.csv", "training.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  std::ifstream curve(dir / "learning_curve.csv");
  std::string header;
  std::getline(curve, header);
  EXPECT_EQ(header, "episode,steps,return,mean_e_p,terminated_by");
}
